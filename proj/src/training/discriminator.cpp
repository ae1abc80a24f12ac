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

#include "training/discriminator.hpp"

DPTC_BEGIN_NAMESPACE

Discriminator::Discriminator(DiscriminatorConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.channels.empty()) fail(ErrorCode::kConfig, "discriminator needs at least one conv stage");
  Rng rng(derive_seed(cfg_.seed, 51));
  int in = cfg_.image_channels;
  for (int c : cfg_.channels) {
    convs_.emplace_back(in, c, 3, 2, 1, rng);
    in = c;
  }
  score_ = nn::Conv3d(in, 1, 3, 3, rng, 0.5);
}

Var Discriminator::forward(const Var& frames, int frames_per_clip) const {
  const Shape& s = frames->shape();
  check_arg(s.size() == 4 && frames_per_clip >= 1 && s[0] % frames_per_clip == 0,
            "discriminator: frames must be [B*F, C, H, W]");
  Var x = frames;
  for (const auto& conv : convs_) x = ops::silu(conv(x));
  const Shape& xs = x->shape();
  const int batch = s[0] / frames_per_clip;
  x = score_(ops::reshape(x, Shape{batch, frames_per_clip, xs[1], xs[2], xs[3]}));
  return ops::sigmoid(ops::mean_per_sample(x));
}

ParamSet Discriminator::params() const {
  ParamSet p;
  for (size_t i = 0; i < convs_.size(); ++i) convs_[i].collect(p, "disc.conv" + std::to_string(i));
  score_.collect(p, "disc.score");
  return p;
}

DPTC_END_NAMESPACE
