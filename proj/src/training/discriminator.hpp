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

#include "core/layers.hpp"

DPTC_BEGIN_NAMESPACE

struct DiscriminatorConfig {
  std::vector<int> channels{16, 32};
  int image_channels = 3;
  std::uint64_t seed = 0;
};

/// Spatio-temporal patch classifier: strided 2D convs per frame, a 3x3x3 conv
/// to one score map, mean over the clip, sigmoid.
class Discriminator {
 public:
  explicit Discriminator(DiscriminatorConfig cfg);

  /// frames [B*F, C, H, W] -> probability of being real, [B].
  Var forward(const Var& frames, int frames_per_clip) const;
  ParamSet params() const;

 private:
  DiscriminatorConfig cfg_;
  std::vector<nn::Conv2d> convs_;
  nn::Conv3d score_;
};

DPTC_END_NAMESPACE
