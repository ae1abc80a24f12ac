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

#include <memory>
#include <string>
#include <vector>

#include "core/layers.hpp"

DPTC_BEGIN_NAMESPACE

/// Fixed, deterministic multi-layer feature map used by perceptual losses and
/// metrics. Features are differentiable with respect to the input frames.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  /// frames [N, C, H, W] -> one feature block per layer, each [N, C_l, H_l, W_l].
  virtual std::vector<Var> extract(const Var& frames) const = 0;
  virtual std::string name() const = 0;
};

class IdentityExtractor final : public FeatureExtractor {
 public:
  std::vector<Var> extract(const Var& frames) const override { return {frames}; }
  std::string name() const override { return "identity"; }
};

/// Stack of frozen stride-2 3x3 convolutions with SiLU, randomly initialized
/// from a seed. Stands in for a pretrained network at desk scale.
class RandomConvPyramid final : public FeatureExtractor {
 public:
  explicit RandomConvPyramid(int in_channels = 3, std::vector<int> widths = {8, 16, 32}, std::uint64_t seed = 1234);
  std::vector<Var> extract(const Var& frames) const override;
  std::string name() const override { return "random_conv_pyramid"; }

 private:
  std::vector<nn::Conv2d> blocks_;
};

/// "identity" or "random_conv_pyramid".
std::unique_ptr<FeatureExtractor> make_feature_extractor(const std::string& name, std::uint64_t seed = 1234);

DPTC_END_NAMESPACE
