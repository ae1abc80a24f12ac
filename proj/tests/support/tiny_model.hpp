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

// Small configurations shared by the unit, gradient and acceptance tests.
// Compiles in either precision; the including file picks it.
#pragma once

#include <memory>
#include <vector>

#include "codec/codec_trainer.hpp"
#include "media/toy_faces.hpp"
#include "training/restoration_model.hpp"
#include "training/trainer.hpp"

namespace tiny {

using namespace dptc;

inline CodecConfig codec_config() {
  CodecConfig c;
  c.latent_channels = 8;
  c.downscale = 4;
  c.bank_size = 12;
  c.clip_frames = 4;
  c.encoder_channels = {6, 8, 8};
  c.generator_channels = {6, 8, 8};
  c.residual_blocks = 1;
  c.frame_attention_blocks = 1;
  c.frame_attention_heads = 2;
  c.seed = 21;
  return c;
}

inline RestorationConfig restoration_config() {
  RestorationConfig r;
  r.codec = codec_config();
  r.predictor.blocks = 1;
  r.predictor.d_model = 8;
  r.predictor.heads = 2;
  r.predictor.ffn_mult = 2;
  r.predictor.seed = 22;
  r.motion.bank_size = 6;
  r.motion.fusion_blocks = 1;
  r.motion.fusion_heads = 2;
  r.derive_geometry(16, 16);
  return r;
}

inline TrainConfig train_config() {
  TrainConfig t;
  t.lr = 1e-3;
  t.batch_size = 2;
  t.clip_frames = 4;
  t.seed = 23;
  t.discriminator.channels = {4, 4};
  return t;
}

inline std::vector<VideoClip> clips(int n, std::uint64_t seed = 2) {
  std::vector<VideoClip> out;
  for (int i = 0; i < n; ++i) out.push_back(render_toy_face(ToyFaceOptions{n, 4, 16, seed}, i));
  return out;
}

/// Crude LQ: a fixed darkening plus a checker pattern, cheap and deterministic.
inline VideoClip degrade(const VideoClip& hq) {
  VideoClip lq = hq;
  const int h = hq.height(), w = hq.width();
  for (std::int64_t i = 0; i < lq.frames.numel(); ++i) {
    const int x = static_cast<int>(i % w), y = static_cast<int>((i / w) % h);
    const Real v = lq.frames[i] * Real(0.8) + (((x + y) & 1) ? Real(0.1) : Real(0));
    lq.frames[i] = std::min<Real>(Real(1), v);
  }
  return lq;
}

/// Restoration model seeded from a fresh codec, with a motion bank built from HQ clips.
struct Setup {
  RestorationConfig cfg = restoration_config();
  std::unique_ptr<VqCodec> codec;
  std::unique_ptr<RestorationModel> model;
  std::vector<VideoClip> hq, lq;
  std::vector<IndexGrid> gt;

  explicit Setup(int n = 2, bool motion = true) {
    cfg.motion.enabled = motion;
    codec = std::make_unique<VqCodec>(cfg.codec);
    model = std::make_unique<RestorationModel>(cfg, *codec);
    hq = clips(n);
    for (const auto& c : hq) lq.push_back(degrade(c));
    if (motion) {
      std::vector<FeatureGrid> feats;
      for (const auto& c : hq) feats.push_back(quantize(encode(c, *codec), codec->vision_bank()).second);
      model->set_motion_bank(build_motion_bank(feats, cfg.motion.bank_size, 5));
    }
    for (const auto& c : hq) gt.push_back(derive_gt_codes(c, *codec));
  }

  std::vector<TrainingPair> pairs() const {
    std::vector<TrainingPair> p;
    for (size_t i = 0; i < hq.size(); ++i) p.push_back({&lq[i], &hq[i], &gt[i]});
    return p;
  }
};

}  // namespace tiny
