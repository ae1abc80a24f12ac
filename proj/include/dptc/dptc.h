/*
 * Copyright 2026 The dptempcoh Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DPTC_DPTC_H
#define DPTC_DPTC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DPTC_BUILDING_LIBRARY)
#define DPTC_API __declspec(dllexport)
#else
#define DPTC_API __declspec(dllimport)
#endif
#else
#define DPTC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every function returning dptc_status leaves a message for
   dptc_last_error() on failure; the message is per thread. */
typedef enum dptc_status {
  DPTC_OK = 0,
  DPTC_ERR_INTERNAL = 1,
  DPTC_ERR_IO = 2,
  DPTC_ERR_CONFIG = 3,
  DPTC_ERR_MISSING_PREREQUISITE = 4,
  DPTC_ERR_NUMERIC = 5,
  DPTC_ERR_INVALID_ARGUMENT = 6
} dptc_status;

typedef struct dptc_clip dptc_clip;   /* F x C x H x W frames in [0, 1] */
typedef struct dptc_model dptc_model; /* trained restoration model */

DPTC_API const char* dptc_version(void);
DPTC_API const char* dptc_last_error(void);
/* Process exit code the CLI uses for a status. */
DPTC_API int dptc_exit_code(dptc_status status);

/* Clips. `data` is F*C*H*W floats, frame-major then channel-major. */
DPTC_API dptc_status dptc_clip_create(int frames, int channels, int height, int width, const float* data,
                                      dptc_clip** out);
DPTC_API dptc_status dptc_clip_load(const char* dir, dptc_clip** out);
DPTC_API dptc_status dptc_clip_save(const dptc_clip* clip, const char* dir);
DPTC_API dptc_status dptc_clip_shape(const dptc_clip* clip, int* frames, int* channels, int* height, int* width);
/* Copies up to `capacity` floats into `out`; fails if the clip is larger. */
DPTC_API dptc_status dptc_clip_data(const dptc_clip* clip, float* out, size_t capacity);
DPTC_API void dptc_clip_free(dptc_clip* clip);

/* Blur, downsample, noise and JPEG with parameters drawn from the given
   closed intervals using `seed`. One draw covers the whole clip. */
typedef struct dptc_degradation_ranges {
  double rho_lo, rho_hi;
  double b_lo, b_hi;
  double sigma_lo, sigma_hi;
  double w_lo, w_hi;
} dptc_degradation_ranges;

DPTC_API dptc_status dptc_degrade(const dptc_clip* clip, const dptc_degradation_ranges* ranges, uint64_t seed,
                                  dptc_clip** out);

/* PSNR in dB (may be +inf), IFD in squared 0-255 units. */
DPTC_API dptc_status dptc_psnr(const dptc_clip* a, const dptc_clip* b, double* out);
DPTC_API dptc_status dptc_ifd(const dptc_clip* clip, double* out);

/* Loads `<run_dir>/model.ckpt` as written by the train command. */
DPTC_API dptc_status dptc_model_load(const char* run_dir, dptc_model** out);
/* use_motion: 1 on, 0 off, -1 whatever the model was trained with. The
   clip must have the model's window length and frame size. */
DPTC_API dptc_status dptc_model_restore(const dptc_model* model, const dptc_clip* lq, int use_motion,
                                        dptc_clip** out);
DPTC_API void dptc_model_free(dptc_model* model);

/* Runs a pipeline command with JSON options; `result_json`, when not NULL,
   receives a malloc'd JSON summary the caller frees with dptc_string_free. */
DPTC_API dptc_status dptc_run(const char* command, const char* options_json, char** result_json);
DPTC_API void dptc_string_free(char* text);

/* Progress lines from dptc_run go to `callback` (NULL restores stderr). */
typedef void (*dptc_log_callback)(const char* line, void* user_data);
DPTC_API void dptc_set_log_callback(dptc_log_callback callback, void* user_data);

#ifdef __cplusplus
}
#endif

#endif /* DPTC_DPTC_H */
