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

#include "core/optim.hpp"

#include <cmath>

DPTC_BEGIN_NAMESPACE

Adam::Adam(ParamSet params, AdamOptions options) : params_(std::move(params)), options_(options) {
  check_arg(options_.lr > 0.0, "Adam: learning rate must be positive");
  for (const auto& item : params_.items()) {
    m_.emplace_back(item.second->shape());
    v_.emplace_back(item.second->shape());
  }
}

void Adam::step() {
  ++steps_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double step_size = options_.lr / c1;
  const auto& items = params_.items();
  for (size_t i = 0; i < items.size(); ++i) {
    Node& p = *items[i].second;
    if (p.grad.numel() != p.value.numel()) continue;
    Real* w = p.value.data();
    const Real* g = p.grad.data();
    Real* m = m_[i].data();
    Real* v = v_[i].data();
    for (std::int64_t j = 0; j < p.value.numel(); ++j) {
      m[j] = static_cast<Real>(b1 * m[j] + (1.0 - b1) * g[j]);
      v[j] = static_cast<Real>(b2 * v[j] + (1.0 - b2) * static_cast<double>(g[j]) * g[j]);
      const double denom = std::sqrt(v[j] / c2) + options_.eps;
      w[j] -= static_cast<Real>(step_size * m[j] / denom);
    }
  }
}

void Adam::save_state(Checkpoint& ckpt, const std::string& prefix) const {
  for (size_t i = 0; i < m_.size(); ++i) {
    ckpt.add(prefix + "m." + std::to_string(i), m_[i]);
    ckpt.add(prefix + "v." + std::to_string(i), v_[i]);
  }
  ckpt.add(prefix + "steps", Tensor::scalar(static_cast<Real>(steps_)));
}

void Adam::load_state(const Checkpoint& ckpt, const std::string& prefix) {
  const Tensor* steps = ckpt.find(prefix + "steps");
  if (!steps) return;
  for (size_t i = 0; i < m_.size(); ++i) {
    const Tensor& m = ckpt.get(prefix + "m." + std::to_string(i));
    const Tensor& v = ckpt.get(prefix + "v." + std::to_string(i));
    if (!m.same_shape(m_[i]) || !v.same_shape(v_[i])) fail(ErrorCode::kConfig, "optimizer state shape mismatch");
    m_[i] = m;
    v_[i] = v;
  }
  steps_ = static_cast<std::int64_t>((*steps)[0]);
}

DPTC_END_NAMESPACE
