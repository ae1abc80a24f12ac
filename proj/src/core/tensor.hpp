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
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "core/common.hpp"

DPTC_BEGIN_NAMESPACE

using Shape = std::vector<int>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major array of Real values. A rank-0 shape holds one scalar.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = Real(0));
  Tensor(Shape shape, std::vector<Real> values);

  static Tensor scalar(Real value) { return Tensor(Shape{}, std::vector<Real>{value}); }

  const Shape& shape() const noexcept { return shape_; }
  int rank() const noexcept { return static_cast<int>(shape_.size()); }
  int dim(int axis) const;
  std::int64_t numel() const noexcept { return static_cast<std::int64_t>(data_.size()); }
  bool empty() const noexcept { return data_.empty(); }

  Real* data() noexcept { return data_.data(); }
  const Real* data() const noexcept { return data_.data(); }
  std::span<Real> values() noexcept { return data_; }
  std::span<const Real> values() const noexcept { return data_; }
  std::vector<Real>& storage() noexcept { return data_; }
  const std::vector<Real>& storage() const noexcept { return data_; }

  Real& operator[](std::int64_t i) noexcept { return data_[static_cast<size_t>(i)]; }
  Real operator[](std::int64_t i) const noexcept { return data_[static_cast<size_t>(i)]; }

  /// Element access for rank-4 tensors, the common frame layout.
  Real& at(int a, int b, int c, int d) noexcept {
    return data_[static_cast<size_t>(((static_cast<std::int64_t>(a) * shape_[1] + b) * shape_[2] + c) *
                                         shape_[3] +
                                     d)];
  }
  Real at(int a, int b, int c, int d) const noexcept {
    return data_[static_cast<size_t>(((static_cast<std::int64_t>(a) * shape_[1] + b) * shape_[2] + c) *
                                         shape_[3] +
                                     d)];
  }

  Tensor reshaped(Shape shape) const;
  void reshape_inplace(Shape shape);
  void fill(Real value);
  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }
  bool all_finite() const noexcept;

 private:
  Shape shape_;
  std::vector<Real> data_;
};

DPTC_END_NAMESPACE
