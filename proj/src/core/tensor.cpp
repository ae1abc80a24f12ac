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

#include "core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

DPTC_BEGIN_NAMESPACE

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    check_arg(d >= 0, "negative dimension in shape " + shape_to_string(shape));
    n *= d;
  }
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, Real fill)
    : shape_(std::move(shape)), data_(static_cast<size_t>(shape_numel(shape_)), fill) {}

Tensor::Tensor(Shape shape, std::vector<Real> values) : shape_(std::move(shape)), data_(std::move(values)) {
  check_arg(static_cast<std::int64_t>(data_.size()) == shape_numel(shape_),
            "value count does not match shape " + shape_to_string(shape_));
}

int Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  check_arg(axis >= 0 && axis < rank(), "axis out of range");
  return shape_[static_cast<size_t>(axis)];
}

Tensor Tensor::reshaped(Shape shape) const {
  Tensor out = *this;
  out.reshape_inplace(std::move(shape));
  return out;
}

void Tensor::reshape_inplace(Shape shape) {
  check_arg(shape_numel(shape) == numel(),
            "cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
  shape_ = std::move(shape);
}

void Tensor::fill(Real value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](Real v) { return std::isfinite(v); });
}

DPTC_END_NAMESPACE
