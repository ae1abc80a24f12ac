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

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core/tensor.hpp"

DPTC_BEGIN_NAMESPACE

struct Node;
using Var = std::shared_ptr<Node>;

/// One value in a reverse-mode computation graph. Leaf parameters persist
/// across steps; intermediate nodes die with the last Var referencing them.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<Var> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backward_fn;

  const Shape& shape() const noexcept { return value.shape(); }
  Tensor& ensure_grad();
};

Var constant(Tensor value);
Var parameter(Tensor value);

/// Creates an op result. The backward closure and the input list are kept only
/// if gradient recording is enabled and some input requires a gradient.
Var make_op(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> backward_fn);

/// Runs reverse accumulation from a scalar root (seed gradient 1).
void backward(const Var& root);

bool grad_enabled() noexcept;

/// Disables graph recording in the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Named, ordered collection of trainable leaves.
class ParamSet {
 public:
  void add(std::string name, Var param);
  void append(const ParamSet& other);

  const std::vector<std::pair<std::string, Var>>& items() const noexcept { return items_; }
  size_t size() const noexcept { return items_.size(); }
  Var find(const std::string& name) const;
  std::int64_t scalar_count() const;
  void zero_grad() const;
  /// Global L2 norm of all gradients; parameters without a gradient count as zero.
  double grad_norm() const;
  /// Scales gradients so the global norm is at most max_norm. Returns the pre-clip norm.
  double clip_grad_norm(double max_norm) const;

 private:
  std::vector<std::pair<std::string, Var>> items_;
};

DPTC_END_NAMESPACE
