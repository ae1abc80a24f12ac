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

// Criteria 2 and 3, built against the double-precision core.
#include <cmath>
#include <cstdio>

#include "acceptance/criteria.hpp"
#include "support/gradient_suite.hpp"

#include "motion/motion_modulator.hpp"

namespace acceptance {

using namespace dptc;

namespace {

std::string format(const char* fmt, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

}  // namespace

Outcome modulation_algebra() {
  constexpr int kTokens = 1000;
  constexpr double kEps = 1e-5;
  constexpr double kMeanTol = 1e-9;     // absolute, scaled by 1 + |mu'|
  constexpr double kStdRelTol = 1e-3;   // adain_corrected std vs sigma' sigma / (sigma + eps)
  constexpr double kVarTol = 1e-6;      // as_printed variance, relative
  Rng rng(2024);
  double worst_mean = 0, worst_std = 0, worst_var = 0;
  int bad = 0;
  for (int t = 0; t < kTokens; ++t) {
    const int c = 2 + static_cast<int>(rng.below(63));
    Tensor z({1, c, 1, 1});
    const double shift = rng.uniform(-3, 3), spread = std::exp(rng.uniform(-3, 1.5));
    for (auto& v : z.values()) v = shift + spread * rng.normal();
    const FeatureGrid grid(z, 1);
    const FrameStats src = frame_channel_stats(grid);
    const double mu_t = rng.uniform(-3, 3), sd_t = std::exp(rng.uniform(-3, 1.5));
    const FrameStats tgt{Tensor({1, 1, 1}, mu_t), Tensor({1, 1, 1}, sd_t * sd_t)};
    const double sigma = std::sqrt(src.sigma2[0]);

    const FeatureGrid a = modulate(grid, src, tgt, ModulationVariant::kAdainCorrected, kEps);
    const FrameStats sa = frame_channel_stats(a);
    const double want_sd = sd_t * sigma / (sigma + kEps);
    const double e_mean = std::abs(sa.mu[0] - mu_t) / (1 + std::abs(mu_t));
    const double e_std = std::abs(std::sqrt(sa.sigma2[0]) - want_sd) / want_sd;

    const FeatureGrid p = modulate(grid, src, tgt, ModulationVariant::kAsPrinted, kEps);
    const double want_var = sd_t * sd_t * src.sigma2[0] / ((sd_t + kEps) * (sd_t + kEps));
    const double e_var = std::abs(frame_channel_stats(p).sigma2[0] - want_var) / std::max(want_var, 1e-300);

    worst_mean = std::max(worst_mean, e_mean);
    worst_std = std::max(worst_std, e_std);
    worst_var = std::max(worst_var, e_var);
    if (!(e_mean <= kMeanTol && e_std <= kStdRelTol && e_var <= kVarTol)) ++bad;
  }
  return {bad == 0, format("1000 tokens: max mean err %.2e, adain std rel err %.2e, as_printed var rel err %.2e",
                           worst_mean, worst_std, worst_var)};
}

Outcome gradient_checks() {
  const gradcheck::Options opt;  // 20 samples, step 1e-3, rel. tol 1e-2
  const auto a = gradient_suite::codec_reconstruction(opt);
  const auto b = gradient_suite::bank_cross_entropy(opt);
  const auto c = gradient_suite::total_generator(opt);
  const bool pass = a.failed == 0 && b.failed == 0 && c.failed == 0 && a.checked == opt.samples &&
                    b.checked == opt.samples && c.checked == opt.samples;
  char buf[400];
  std::snprintf(buf, sizeof buf,
                "worst rel err: codec %.2e (%d/%d ok), bank CE %.2e (%d/%d ok), total G %.2e (%d/%d ok); "
                "redrawn at kinks or code flips: %d/%d/%d",
                a.worst, a.checked - a.failed, opt.samples, b.worst, b.checked - b.failed, opt.samples, c.worst,
                c.checked - c.failed, opt.samples, a.resampled, b.resampled, c.resampled);
  return {pass, buf};
}

}  // namespace acceptance
