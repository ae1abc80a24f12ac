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

#include "media/degradation.hpp"

#include <algorithm>
#include <cmath>

#include "media/jpeg_codec.hpp"

DPTC_BEGIN_NAMESPACE

namespace {

constexpr double kMinBlurSigma = 1e-6;

void check_interval(const Interval& iv, double lo, double hi, const char* name) {
  if (!(iv.lo <= iv.hi)) fail(ErrorCode::kConfig, std::string(name) + " range is empty");
  if (iv.lo < lo || iv.hi > hi)
    fail(ErrorCode::kConfig, std::string(name) + " range [" + std::to_string(iv.lo) + "," + std::to_string(iv.hi) +
                                 "] outside [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
}

double draw(const Interval& base, double jitter, Rng& rng) {
  if (base.degenerate()) return base.lo;
  const double centre = rng.uniform(base.lo, base.hi);
  return rng.uniform(centre - jitter, centre + jitter);
}

int reflect101(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

double cubic_weight(double x) {
  constexpr double a = -0.75;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

// Taps and source indices for one output coordinate.
struct Taps {
  int index[4];
  double weight[4];
};

std::vector<Taps> cubic_taps(int in_size, int out_size) {
  std::vector<Taps> taps(static_cast<size_t>(out_size));
  const double scale = static_cast<double>(in_size) / out_size;
  for (int o = 0; o < out_size; ++o) {
    const double src = (o + 0.5) * scale - 0.5;
    const int base = static_cast<int>(std::floor(src));
    const double t = src - base;
    Taps& tp = taps[static_cast<size_t>(o)];
    for (int k = 0; k < 4; ++k) {
      tp.index[k] = std::clamp(base - 1 + k, 0, in_size - 1);
      tp.weight[k] = cubic_weight(t - (k - 1));
    }
  }
  return taps;
}

}  // namespace

void DegradationParams::validate() const {
  check_arg(std::isfinite(blur_sigma) && blur_sigma > 0.0, "blur sigma must be positive");
  check_arg(std::isfinite(down_factor) && down_factor >= 1.0, "down factor must be >= 1");
  check_arg(std::isfinite(noise_sigma) && noise_sigma >= 0.0, "noise sigma must be >= 0");
  check_arg(jpeg_quality >= 1 && jpeg_quality <= 100, "JPEG quality must be in [1,100]");
}

void DegradationRanges::validate() const {
  check_interval(rho, 0.0, 11.0, "rho");
  check_interval(b, 1.0, 33.0, "b");
  check_interval(sigma, 0.0, 11.0, "sigma");
  check_interval(w, 1.0, 100.0, "w");
  if (!rho.degenerate()) check_interval(rho, 1.0, 10.0, "rho");
  if (!b.degenerate()) check_interval(b, 2.0, 32.0, "b");
  if (!sigma.degenerate()) check_interval(sigma, 0.0, 10.0, "sigma");
  if (!w.degenerate()) check_interval(w, 50.0, 100.0, "w");
  if (rho_jitter < 0 || b_jitter < 0 || sigma_jitter < 0 || w_jitter < 0)
    fail(ErrorCode::kConfig, "jitter widths must be non-negative");
}

DegradationParams sample_degradation_params(const DegradationRanges& ranges, Rng& rng) {
  DegradationParams p;
  p.blur_sigma = std::max(draw(ranges.rho, ranges.rho_jitter, rng), kMinBlurSigma);
  p.down_factor = std::max(draw(ranges.b, ranges.b_jitter, rng), 1.0);
  if (ranges.sigma.degenerate()) {
    p.noise_sigma = ranges.sigma.lo;
  } else {
    const double centre = rng.uniform(ranges.sigma.lo, ranges.sigma.hi);
    p.noise_sigma = rng.uniform(std::max(0.0, centre - ranges.sigma_jitter), centre + ranges.sigma_jitter);
  }
  p.jpeg_quality = std::clamp(static_cast<int>(std::lround(draw(ranges.w, ranges.w_jitter, rng))), 1, 100);
  return p;
}

DegradationParams sample_degradation_params(const DegradationRanges& ranges) {
  Rng rng(ranges.seed);
  return sample_degradation_params(ranges, rng);
}

std::vector<double> gaussian_kernel(double sigma) {
  check_arg(sigma > 0.0, "gaussian_kernel: sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
    k[static_cast<size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : k) v /= total;
  return k;
}

Tensor gaussian_blur(const Tensor& frame, double sigma) {
  check_arg(frame.rank() == 3, "gaussian_blur expects [C, H, W]");
  const int c = frame.dim(0), h = frame.dim(1), w = frame.dim(2);
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  Tensor tmp(frame.shape());
  Tensor out(frame.shape());
  for (int ch = 0; ch < c; ++ch) {
    const Real* src = frame.data() + static_cast<std::int64_t>(ch) * h * w;
    Real* mid = tmp.data() + static_cast<std::int64_t>(ch) * h * w;
    Real* dst = out.data() + static_cast<std::int64_t>(ch) * h * w;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[static_cast<size_t>(i + radius)] * src[y * w + reflect101(x + i, w)];
        mid[y * w + x] = static_cast<Real>(acc);
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[static_cast<size_t>(i + radius)] * mid[reflect101(y + i, h) * w + x];
        dst[y * w + x] = static_cast<Real>(acc);
      }
  }
  return out;
}

Tensor resize_bicubic(const Tensor& frame, int out_h, int out_w) {
  check_arg(frame.rank() == 3 && out_h >= 1 && out_w >= 1, "resize_bicubic expects [C, H, W] and a positive size");
  const int c = frame.dim(0), h = frame.dim(1), w = frame.dim(2);
  const auto ty = cubic_taps(h, out_h);
  const auto tx = cubic_taps(w, out_w);
  Tensor rows(Shape{c, h, out_w});
  Tensor out(Shape{c, out_h, out_w});
  for (int ch = 0; ch < c; ++ch) {
    const Real* src = frame.data() + static_cast<std::int64_t>(ch) * h * w;
    Real* mid = rows.data() + static_cast<std::int64_t>(ch) * h * out_w;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < out_w; ++x) {
        const Taps& t = tx[static_cast<size_t>(x)];
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += t.weight[k] * src[y * w + t.index[k]];
        mid[y * out_w + x] = static_cast<Real>(acc);
      }
    Real* dst = out.data() + static_cast<std::int64_t>(ch) * out_h * out_w;
    for (int y = 0; y < out_h; ++y) {
      const Taps& t = ty[static_cast<size_t>(y)];
      for (int x = 0; x < out_w; ++x) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += t.weight[k] * mid[t.index[k] * out_w + x];
        dst[y * out_w + x] = static_cast<Real>(acc);
      }
    }
  }
  return out;
}

Tensor degrade_frame(const Tensor& frame, const DegradationParams& params, std::uint64_t noise_seed) {
  check_arg(frame.rank() == 3, "degrade_frame expects [C, H, W]");
  check_arg(frame.dim(0) == 1 || frame.dim(0) == 3, "degrade_frame: 1 or 3 channels");
  check_arg(frame.all_finite(), "degrade_frame: non-finite input values");
  params.validate();
  const int c = frame.dim(0), h = frame.dim(1), w = frame.dim(2);

  Tensor x = gaussian_blur(frame, params.blur_sigma);
  const int small_h = std::max(1, static_cast<int>(std::lround(h / params.down_factor)));
  const int small_w = std::max(1, static_cast<int>(std::lround(w / params.down_factor)));
  if (small_h != h || small_w != w) x = resize_bicubic(resize_bicubic(x, small_h, small_w), h, w);

  if (params.noise_sigma > 0.0) {
    Rng rng(noise_seed);
    const double std_dev = params.noise_sigma / 255.0;
    for (Real& v : x.values()) v += static_cast<Real>(std_dev * rng.normal());
  }

  // Quantize to 8-bit RGB for the JPEG round trip; gray is replicated and collapsed back.
  const int plane = h * w;
  Image8 img{w, h, 3, std::vector<std::uint8_t>(static_cast<size_t>(plane) * 3)};
  for (int p = 0; p < plane; ++p)
    for (int ch = 0; ch < 3; ++ch) {
      const double v = std::clamp(static_cast<double>(x[static_cast<std::int64_t>(c == 3 ? ch : 0) * plane + p]), 0.0, 1.0);
      img.pixels[static_cast<size_t>(p * 3 + ch)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  const Image8 decoded = jpeg_round_trip(img, params.jpeg_quality);
  Tensor out(Shape{c, h, w});
  for (int p = 0; p < plane; ++p) {
    if (c == 3) {
      for (int ch = 0; ch < 3; ++ch)
        out[static_cast<std::int64_t>(ch) * plane + p] = static_cast<Real>(decoded.pixels[static_cast<size_t>(p * 3 + ch)]) / Real(255);
    } else {
      const double s = decoded.pixels[static_cast<size_t>(p * 3)] + decoded.pixels[static_cast<size_t>(p * 3 + 1)] +
                       decoded.pixels[static_cast<size_t>(p * 3 + 2)];
      out[p] = static_cast<Real>(s / (3.0 * 255.0));
    }
  }
  for (Real& v : out.values()) v = std::clamp(v, Real(0), Real(1));
  return out;
}

DegradedClip degrade_clip(const VideoClip& clip, const DegradationRanges& ranges, bool per_clip_params) {
  clip.validate();
  ranges.validate();
  Rng param_rng(ranges.seed);
  DegradedClip result;
  result.clip = VideoClip(Tensor(clip.frames.shape()), clip.frame_rate);
  const DegradationParams shared = sample_degradation_params(ranges, param_rng);
  for (int f = 0; f < clip.frame_count(); ++f) {
    const DegradationParams p = (per_clip_params || f == 0) ? shared : sample_degradation_params(ranges, param_rng);
    result.frame_params.push_back(p);
    result.clip.set_frame(f, degrade_frame(clip.frame(f), p, derive_seed(ranges.seed, 1000 + static_cast<std::uint64_t>(f))));
  }
  result.params = shared;
  return result;
}

DPTC_END_NAMESPACE
