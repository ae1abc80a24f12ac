// Copyright 2026 The dptempcoh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dptc/dptc.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>

#include "core/checkpoint.hpp"
#include "eval/metrics.hpp"
#include "media/degradation.hpp"
#include "pipeline/commands.hpp"
#include "training/restoration_model.hpp"

struct dptc_clip {
  dptc::VideoClip clip;
};

struct dptc_model {
  std::unique_ptr<dptc::RestorationModel> model;
};

namespace {

thread_local std::string g_last_error;

dptc_status to_status(dptc::ErrorCode code) {
  switch (code) {
    case dptc::ErrorCode::kInvalidArgument:
      return DPTC_ERR_INVALID_ARGUMENT;
    case dptc::ErrorCode::kIo:
      return DPTC_ERR_IO;
    case dptc::ErrorCode::kConfig:
      return DPTC_ERR_CONFIG;
    case dptc::ErrorCode::kMissingPrerequisite:
      return DPTC_ERR_MISSING_PREREQUISITE;
    case dptc::ErrorCode::kNumeric:
      return DPTC_ERR_NUMERIC;
    case dptc::ErrorCode::kInternal:
      return DPTC_ERR_INTERNAL;
  }
  return DPTC_ERR_INTERNAL;
}

template <class F>
dptc_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return DPTC_OK;
  } catch (const dptc::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return DPTC_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) dptc::fail(dptc::ErrorCode::kInvalidArgument, what);
}

dptc_clip* wrap(dptc::VideoClip clip) { return new dptc_clip{std::move(clip)}; }

std::mutex g_log_mutex;
dptc_log_callback g_log_callback = nullptr;
void* g_log_user = nullptr;

}  // namespace

extern "C" {

const char* dptc_version(void) { return DPTC_VERSION_STRING; }

const char* dptc_last_error(void) { return g_last_error.c_str(); }

int dptc_exit_code(dptc_status status) {
  switch (status) {
    case DPTC_OK:
      return 0;
    case DPTC_ERR_INVALID_ARGUMENT:
      return dptc::exit_code_for(dptc::ErrorCode::kInvalidArgument);
    case DPTC_ERR_IO:
      return dptc::exit_code_for(dptc::ErrorCode::kIo);
    case DPTC_ERR_CONFIG:
      return dptc::exit_code_for(dptc::ErrorCode::kConfig);
    case DPTC_ERR_MISSING_PREREQUISITE:
      return dptc::exit_code_for(dptc::ErrorCode::kMissingPrerequisite);
    case DPTC_ERR_NUMERIC:
      return dptc::exit_code_for(dptc::ErrorCode::kNumeric);
    default:
      return 1;
  }
}

dptc_status dptc_clip_create(int frames, int channels, int height, int width, const float* data, dptc_clip** out) {
  return guarded([&] {
    require(out != nullptr && data != nullptr, "null argument");
    require(frames > 0 && channels > 0 && height > 0 && width > 0, "clip dimensions must be positive");
    dptc::Tensor t(dptc::Shape{frames, channels, height, width});
    std::copy_n(data, t.numel(), t.data());
    dptc::VideoClip clip(std::move(t));
    clip.validate();
    *out = wrap(std::move(clip));
  });
}

dptc_status dptc_clip_load(const char* dir, dptc_clip** out) {
  return guarded([&] {
    require(dir != nullptr && out != nullptr, "null argument");
    *out = wrap(dptc::load_clip(dir));
  });
}

dptc_status dptc_clip_save(const dptc_clip* clip, const char* dir) {
  return guarded([&] {
    require(clip != nullptr && dir != nullptr, "null argument");
    dptc::save_clip(clip->clip, dir);
  });
}

dptc_status dptc_clip_shape(const dptc_clip* clip, int* frames, int* channels, int* height, int* width) {
  return guarded([&] {
    require(clip != nullptr, "null clip");
    if (frames) *frames = clip->clip.frame_count();
    if (channels) *channels = clip->clip.channels();
    if (height) *height = clip->clip.height();
    if (width) *width = clip->clip.width();
  });
}

dptc_status dptc_clip_data(const dptc_clip* clip, float* out, size_t capacity) {
  return guarded([&] {
    require(clip != nullptr && out != nullptr, "null argument");
    const auto n = static_cast<size_t>(clip->clip.frames.numel());
    require(capacity >= n, "buffer too small for clip data");
    std::copy_n(clip->clip.frames.data(), n, out);
  });
}

void dptc_clip_free(dptc_clip* clip) { delete clip; }

dptc_status dptc_degrade(const dptc_clip* clip, const dptc_degradation_ranges* ranges, uint64_t seed,
                         dptc_clip** out) {
  return guarded([&] {
    require(clip != nullptr && ranges != nullptr && out != nullptr, "null argument");
    dptc::DegradationRanges r;
    r.rho = {ranges->rho_lo, ranges->rho_hi};
    r.b = {ranges->b_lo, ranges->b_hi};
    r.sigma = {ranges->sigma_lo, ranges->sigma_hi};
    r.w = {ranges->w_lo, ranges->w_hi};
    r.seed = seed;
    r.validate();
    *out = wrap(dptc::degrade_clip(clip->clip, r, true).clip);
  });
}

dptc_status dptc_psnr(const dptc_clip* a, const dptc_clip* b, double* out) {
  return guarded([&] {
    require(a != nullptr && b != nullptr && out != nullptr, "null argument");
    *out = dptc::psnr(a->clip, b->clip);
  });
}

dptc_status dptc_ifd(const dptc_clip* clip, double* out) {
  return guarded([&] {
    require(clip != nullptr && out != nullptr, "null argument");
    *out = dptc::ifd(clip->clip);
  });
}

dptc_status dptc_model_load(const char* run_dir, dptc_model** out) {
  return guarded([&] {
    require(run_dir != nullptr && out != nullptr, "null argument");
    auto model = std::make_unique<dptc_model>();
    model->model = dptc::load_restoration_model(run_dir);
    *out = model.release();
  });
}

dptc_status dptc_model_restore(const dptc_model* model, const dptc_clip* lq, int use_motion, dptc_clip** out) {
  return guarded([&] {
    require(model != nullptr && lq != nullptr && out != nullptr, "null argument");
    const auto& m = *model->model;
    const bool motion = use_motion < 0 ? m.motion_ready() : use_motion != 0;
    *out = wrap(m.restore(lq->clip, motion));
  });
}

void dptc_model_free(dptc_model* model) { delete model; }

dptc_status dptc_run(const char* command, const char* options_json, char** result_json) {
  if (result_json) *result_json = nullptr;
  return guarded([&] {
    require(command != nullptr, "null command");
    dptc::Json args = dptc::Json::object();
    if (options_json && *options_json) {
      args = dptc::Json::parse(options_json, nullptr, false);
      if (args.is_discarded() || !args.is_object())
        dptc::fail(dptc::ErrorCode::kConfig, "options must be a JSON object");
    }
    const std::string text = dptc::run_command(command, args).dump();
    if (result_json) {
      char* buf = static_cast<char*>(std::malloc(text.size() + 1));
      if (!buf) throw std::bad_alloc();
      std::memcpy(buf, text.c_str(), text.size() + 1);
      *result_json = buf;
    }
  });
}

void dptc_string_free(char* text) { std::free(text); }

void dptc_set_log_callback(dptc_log_callback callback, void* user_data) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_log_callback = callback;
  g_log_user = user_data;
  if (!callback) {
    dptc::set_log_sink([](const std::string& line) { std::fputs((line + "\n").c_str(), stderr); });
    return;
  }
  dptc::set_log_sink([](const std::string& line) {
    std::lock_guard<std::mutex> inner(g_log_mutex);
    if (g_log_callback) g_log_callback(line.c_str(), g_log_user);
  });
}

}  // extern "C"
