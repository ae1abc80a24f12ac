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

#pragma once

#include <cstdint>
#include <vector>

#include "core/rng.hpp"
#include "media/video_clip.hpp"

DPTC_BEGIN_NAMESPACE

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool degenerate() const noexcept { return lo == hi; }
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

/// Parameters of one blur -> downsample -> noise -> JPEG degradation.
struct DegradationParams {
  double blur_sigma = 1.0;   // Gaussian kernel std, > 0
  double down_factor = 1.0;  // scale factor, >= 1
  double noise_sigma = 0.0;  // in 0-255 pixel units, >= 0
  int jpeg_quality = 100;    // [1, 100]

  void validate() const;
  bool operator==(const DegradationParams&) const = default;
};

/// Sampling domain. Each parameter is drawn in two levels: a base value
/// uniformly from its interval, then the final value uniformly within
/// +-jitter of the base (jitter 1, 1, 1, 5 by default). A degenerate interval
/// pins the final value exactly.
struct DegradationRanges {
  Interval rho{1.0, 10.0};
  Interval b{2.0, 32.0};
  Interval sigma{0.0, 10.0};
  Interval w{50.0, 100.0};
  double rho_jitter = 1.0;
  double b_jitter = 1.0;
  double sigma_jitter = 1.0;
  double w_jitter = 5.0;
  std::uint64_t seed = 0;

  /// Throws kConfig if an interval is empty or outside its legal domain.
  void validate() const;
};

DegradationParams sample_degradation_params(const DegradationRanges& ranges, Rng& rng);
/// Draws from a generator seeded with ranges.seed.
DegradationParams sample_degradation_params(const DegradationRanges& ranges);

/// Normalized 1-D Gaussian taps; length 2*ceil(3*sigma)+1.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur of a [C, H, W] frame with reflect-101 borders.
Tensor gaussian_blur(const Tensor& frame, double sigma);

/// Bicubic resampling (a = -0.75, half-pixel centres, replicated borders).
Tensor resize_bicubic(const Tensor& frame, int out_h, int out_w);

/// Applies blur, bicubic down/up sampling, additive noise and a JPEG round
/// trip to a [C, H, W] frame in [0,1]. Output has the input's shape.
Tensor degrade_frame(const Tensor& frame, const DegradationParams& params, std::uint64_t noise_seed);

struct DegradedClip {
  VideoClip clip;
  /// Parameters of frame 0 (all frames when sampled per clip).
  DegradationParams params;
  std::vector<DegradationParams> frame_params;
};

/// Degrades every frame of `clip`. With per_clip_params, one parameter draw
/// drives all frames; noise is still independent per frame.
DegradedClip degrade_clip(const VideoClip& clip, const DegradationRanges& ranges, bool per_clip_params = true);

DPTC_END_NAMESPACE
