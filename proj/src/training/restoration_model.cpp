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

#include "training/restoration_model.hpp"

#include <algorithm>

#include "core/checkpoint.hpp"

DPTC_BEGIN_NAMESPACE

void RestorationConfig::derive_geometry(int image_height, int image_width) {
  predictor.frames = codec.clip_frames;
  predictor.height = image_height / codec.downscale;
  predictor.width = image_width / codec.downscale;
  predictor.latent_channels = codec.latent_channels;
  predictor.bank_size = codec.bank_size;
}

void RestorationConfig::validate() const {
  codec.validate();
  predictor.validate();
  if (predictor.latent_channels != codec.latent_channels || predictor.bank_size != codec.bank_size ||
      predictor.frames != codec.clip_frames)
    fail(ErrorCode::kConfig, "predictor geometry disagrees with the codec");
  if (motion.enabled) {
    if (motion.bank_size < 1) fail(ErrorCode::kConfig, "bank_size_motion must be positive");
    if (!(motion.epsilon > 0)) fail(ErrorCode::kConfig, "epsilon must be positive");
    if (motion.fusion_heads < 1 || codec.latent_channels % motion.fusion_heads != 0)
      fail(ErrorCode::kConfig, "fusion heads must divide latent_channels");
  }
}

namespace {

FusionConfig fusion_config(const RestorationConfig& cfg) {
  FusionConfig f;
  f.blocks = cfg.motion.enabled ? cfg.motion.fusion_blocks : 0;
  f.heads = cfg.motion.fusion_heads;
  f.ffn_mult = cfg.motion.fusion_ffn_mult;
  f.channels = cfg.codec.latent_channels;
  f.seed = cfg.codec.seed;
  return f;
}

}  // namespace

RestorationModel::RestorationModel(RestorationConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      codec_(cfg_.codec),
      predictor_(cfg_.predictor),
      fusion_(fusion_config(cfg_)) {}

RestorationModel::RestorationModel(RestorationConfig cfg, const VqCodec& pretrained) : RestorationModel(std::move(cfg)) {
  copy_param_values(pretrained.all_params(), codec_.all_params());
}

void RestorationModel::set_motion_bank(MotionStatsBank bank) {
  if (bank.frames != cfg_.codec.clip_frames)
    fail(ErrorCode::kInvalidArgument, "motion bank built for " + std::to_string(bank.frames) + " frames, model uses " +
                                          std::to_string(cfg_.codec.clip_frames));
  motion_bank_ = std::move(bank);
}

RestorationModel::Output RestorationModel::forward(const Var& lq, int batch, bool use_motion) const {
  if (use_motion && !motion_ready())
    fail(ErrorCode::kMissingPrerequisite, "motion modulation requested but no motion bank is attached");
  const int frames = cfg_.codec.clip_frames;
  check_arg(lq->value.rank() == 4 && lq->value.dim(0) == batch * frames,
            "restoration: input must hold " + std::to_string(batch) + " clips of " + std::to_string(frames) + " frames");
  Output out;
  const Var z = codec_.encoder().forward(lq);
  const Shape& zs = z->shape();
  const int h = zs[2], w = zs[3], l = zs[1];
  out.logits = predictor_.forward(z, batch);
  out.codes = argmax_rows(out.logits->value);

  // z' in token order (clip, f, y, x), matching the logits.
  {
    NoGradGuard no_grad;
    const VisionBank bank = codec_.vision_bank();
    Tensor tokens(Shape{static_cast<int>(out.codes.size()), l});
    for (size_t i = 0; i < out.codes.size(); ++i)
      std::copy_n(bank.row(out.codes[i]), l, tokens.data() + static_cast<std::int64_t>(i) * l);
    out.content = tokens_to_grid(constant(std::move(tokens)), zs[0], h, w)->value;
  }

  Var z_hat = constant(out.content);
  if (use_motion) {
    out.modulated = Tensor(out.content.shape());
    const std::int64_t per_clip = out.content.numel() / batch;
    for (int b = 0; b < batch; ++b) {
      Tensor slice(Shape{frames, l, h, w});
      std::copy_n(out.content.data() + b * per_clip, per_clip, slice.data());
      const FeatureGrid zp(std::move(slice), cfg_.codec.downscale);
      const FrameStats stats = frame_channel_stats(zp);
      const FrameStats matched = match_stats(stats, *motion_bank_);
      const FeatureGrid zpp = modulate(zp, stats, matched, cfg_.motion.variant, cfg_.motion.epsilon);
      std::copy_n(zpp.values.data(), per_clip, out.modulated.data() + b * per_clip);
    }
    z_hat = fusion_.forward(z_hat, constant(out.modulated), batch);
  }
  out.restored = codec_.generator().forward(z_hat, frames);
  return out;
}

VideoClip RestorationModel::restore(const VideoClip& lq, bool use_motion) const {
  const VideoClip input = cfg_.codec.image_channels == 3 ? to_rgb(lq) : to_gray(lq);
  NoGradGuard no_grad;
  const Output out = forward(constant(input.frames), 1, use_motion);
  return VideoClip(ops::clamp(out.restored, Real(0), Real(1))->value, lq.frame_rate);
}

ParamSet RestorationModel::trainable_params() const {
  ParamSet p;
  codec_.encoder().collect(p, "codec.encoder.");
  const ParamSet pred = predictor_.params(), fus = fusion_.params();
  for (const auto& [name, v] : pred.items()) p.add("predictor." + name, v);
  for (const auto& [name, v] : fus.items()) p.add("fusion." + name, v);
  codec_.generator().collect(p, "codec.generator.");
  return p;
}

ParamSet RestorationModel::all_params() const {
  ParamSet p = trainable_params();
  p.add("codec.bank", codec_.bank());
  return p;
}

IndexGrid derive_gt_codes(const VideoClip& hq, const VqCodec& frozen) {
  return quantize(encode(hq, frozen), frozen.vision_bank()).first;
}

DPTC_END_NAMESPACE
