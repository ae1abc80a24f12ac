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

#include "codec/perceptual.hpp"

DPTC_BEGIN_NAMESPACE

RandomConvPyramid::RandomConvPyramid(int in_channels, std::vector<int> widths, std::uint64_t seed) {
  Rng rng(seed);
  int c = in_channels;
  for (int w : widths) {
    nn::Conv2d conv(c, w, 3, 2, 1, rng, 1.5);
    conv.weight->requires_grad = false;
    conv.bias->requires_grad = false;
    blocks_.push_back(conv);
    c = w;
  }
}

std::vector<Var> RandomConvPyramid::extract(const Var& frames) const {
  std::vector<Var> features;
  Var x = frames;
  for (const auto& conv : blocks_) {
    x = ops::silu(conv(x));
    features.push_back(x);
  }
  return features;
}

std::unique_ptr<FeatureExtractor> make_feature_extractor(const std::string& name, std::uint64_t seed) {
  if (name == "identity") return std::make_unique<IdentityExtractor>();
  if (name == "random_conv_pyramid") return std::make_unique<RandomConvPyramid>(3, std::vector<int>{8, 16, 32}, seed);
  fail(ErrorCode::kConfig, "unknown feature extractor '" + name + "'");
}

DPTC_END_NAMESPACE
