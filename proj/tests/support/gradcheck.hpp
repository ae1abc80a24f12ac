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

// Central finite-difference gradient verification. Include from a translation
// unit compiled in double precision.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "core/autograd.hpp"
#include "core/rng.hpp"

namespace gradcheck {

using namespace dptc;

struct Options {
  int samples = 20;
  double step = 1e-3;
  double tolerance = 1e-2;
  /// Denominator floor: gradients smaller than this are compared absolutely.
  double floor = 1e-4;
  std::uint64_t seed = 1;
};

struct Result {
  int checked = 0;
  int failed = 0;
  int resampled = 0;
  double worst = 0;
};

/// `loss` builds the scalar objective. `signature`, if given, returns the
/// discrete choices (argmax codes) behind the loss; a parameter whose +/-step
/// evaluations disagree on them sits on a discontinuity and is redrawn. So is
/// one whose forward and backward one-sided slopes disagree beyond the
/// tolerance: an L1 or ReLU kink lies within +/-step there.
inline Result check(const std::function<Var()>& loss, const ParamSet& params, const Options& opt,
                    const std::function<std::vector<int>()>& signature = {}) {
  params.zero_grad();
  const Var base = loss();
  const double l0 = base->value[0];
  backward(base);
  std::vector<std::pair<Var, std::int64_t>> picks;
  Rng rng(opt.seed);
  Result res;
  int attempts = 0;
  const auto& items = params.items();
  while (res.checked < opt.samples && attempts < opt.samples * 20) {
    ++attempts;
    const Var& p = items[rng.below(items.size())].second;
    const std::int64_t i = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(p->value.numel())));
    const double analytic = p->grad.numel() ? p->grad[i] : 0.0;
    const Real saved = p->value[i];
    double lp, lm;
    std::vector<int> sp, sm;
    {
      NoGradGuard ng;
      p->value[i] = saved + opt.step;
      lp = loss()->value[0];
      if (signature) sp = signature();
      p->value[i] = saved - opt.step;
      lm = loss()->value[0];
      if (signature) sm = signature();
      p->value[i] = saved;
    }
    if (signature && sp != sm) {
      ++res.resampled;
      continue;
    }
    const double fwd = (lp - l0) / opt.step, bwd = (l0 - lm) / opt.step;
    if (std::abs(fwd - bwd) > opt.tolerance * std::max({std::abs(fwd), std::abs(bwd), opt.floor})) {
      ++res.resampled;
      continue;
    }
    const double numeric = (lp - lm) / (2 * opt.step);
    const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), opt.floor});
    res.worst = std::max(res.worst, rel);
    ++res.checked;
    if (!(rel <= opt.tolerance)) ++res.failed;
  }
  return res;
}

}  // namespace gradcheck
