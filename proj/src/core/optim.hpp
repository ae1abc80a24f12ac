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

#include "core/checkpoint.hpp"

DPTC_BEGIN_NAMESPACE

struct AdamOptions {
  double lr = 8e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over a fixed parameter list. Parameters without a gradient this step
/// are left untouched (their moments do not decay either).
class Adam {
 public:
  Adam(ParamSet params, AdamOptions options);

  void step();
  void zero_grad() const { params_.zero_grad(); }
  const ParamSet& params() const noexcept { return params_; }
  AdamOptions& options() noexcept { return options_; }
  std::int64_t step_count() const noexcept { return steps_; }

  /// Moment buffers, in parameter order, for checkpointing.
  std::vector<Tensor>& first_moments() noexcept { return m_; }
  std::vector<Tensor>& second_moments() noexcept { return v_; }
  void set_step_count(std::int64_t steps) noexcept { steps_ = steps; }

  /// Stores moments and the step counter as "<prefix>m.<i>", "<prefix>v.<i>", "<prefix>steps".
  void save_state(Checkpoint& ckpt, const std::string& prefix) const;
  /// Restores state written by save_state; missing blocks leave the optimizer fresh.
  void load_state(const Checkpoint& ckpt, const std::string& prefix);

 private:
  ParamSet params_;
  AdamOptions options_;
  std::vector<Tensor> m_, v_;
  std::int64_t steps_ = 0;
};

DPTC_END_NAMESPACE
