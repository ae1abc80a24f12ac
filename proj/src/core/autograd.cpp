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

#include "core/autograd.hpp"

#include <cmath>
#include <unordered_set>

DPTC_BEGIN_NAMESPACE

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

Tensor& Node::ensure_grad() {
  if (grad.numel() != value.numel()) grad = Tensor(value.shape());
  return grad;
}

Var constant(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return node;
}

Var parameter(Tensor value) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = true;
  return node;
}

Var make_op(Tensor value, std::vector<Var> inputs, std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  if (!g_grad_enabled) return node;
  bool any = false;
  for (const auto& in : inputs) any = any || (in && in->requires_grad);
  if (!any) return node;
  node->requires_grad = true;
  node->inputs = std::move(inputs);
  node->backward_fn = std::move(backward_fn);
  return node;
}

void backward(const Var& root) {
  check_arg(root && root->value.numel() == 1, "backward() needs a scalar root");
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order without deep recursion.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child && child->requires_grad && !visited.count(child)) {
        visited.insert(child);
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad()[0] += Real(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward_fn && node->grad.numel() == node->value.numel()) node->backward_fn(*node);
  }
  // Intermediate gradients are not needed once propagated.
  for (Node* node : order) {
    if (node->backward_fn) node->grad = Tensor();
  }
}

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

void ParamSet::add(std::string name, Var param) {
  check_arg(param != nullptr, "null parameter " + name);
  check_arg(!find(name), "duplicate parameter name " + name);
  items_.emplace_back(std::move(name), std::move(param));
}

void ParamSet::append(const ParamSet& other) {
  for (const auto& [name, p] : other.items_) add(name, p);
}

Var ParamSet::find(const std::string& name) const {
  for (const auto& [n, p] : items_)
    if (n == name) return p;
  return nullptr;
}

std::int64_t ParamSet::scalar_count() const {
  std::int64_t n = 0;
  for (const auto& item : items_) n += item.second->value.numel();
  return n;
}

void ParamSet::zero_grad() const {
  for (const auto& item : items_) item.second->grad = Tensor();
}

double ParamSet::grad_norm() const {
  double sq = 0.0;
  for (const auto& item : items_) {
    for (Real g : item.second->grad.values()) sq += static_cast<double>(g) * g;
  }
  return std::sqrt(sq);
}

double ParamSet::clip_grad_norm(double max_norm) const {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const Real s = static_cast<Real>(max_norm / norm);
    for (const auto& item : items_) {
      for (Real& g : item.second->grad.values()) g *= s;
    }
  }
  return norm;
}

DPTC_END_NAMESPACE
