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

#include <optional>
#include <vector>

#include "codec/vq_codec.hpp"
#include "motion/motion_modulator.hpp"
#include "predictor/content_predictor.hpp"

DPTC_BEGIN_NAMESPACE

struct MotionConfig {
  int bank_size = 16384;
  ModulationVariant variant = ModulationVariant::kAdainCorrected;
  double epsilon = 1e-5;
  int fusion_blocks = 2;
  int fusion_heads = 4;
  int fusion_ffn_mult = 2;
  int kmeans_iters = 50;
  bool enabled = true;
};

struct RestorationConfig {
  CodecConfig codec;
  PredictorConfig predictor;
  MotionConfig motion;

  /// Fills the predictor's geometry fields from the codec and a frame size.
  void derive_geometry(int image_height, int image_width);
  void validate() const;
};

/// Encoder copy, content predictor, motion modulation plus fusion, and the
/// generator. The vision bank is carried along frozen.
class RestorationModel {
 public:
  explicit RestorationModel(RestorationConfig cfg);
  /// Starts from pretrained codec weights.
  RestorationModel(RestorationConfig cfg, const VqCodec& pretrained);

  const RestorationConfig& config() const noexcept { return cfg_; }
  VqCodec& codec() noexcept { return codec_; }
  const VqCodec& codec() const noexcept { return codec_; }
  const ContentPredictor& predictor() const noexcept { return predictor_; }
  const FusionModule& fusion() const noexcept { return fusion_; }

  void set_motion_bank(MotionStatsBank bank);
  const std::optional<MotionStatsBank>& motion_bank() const noexcept { return motion_bank_; }
  /// True when motion modulation is configured and a bank is attached.
  bool motion_ready() const noexcept { return cfg_.motion.enabled && motion_bank_.has_value(); }

  struct Output {
    Var restored;  // unclamped [B*F, C, H, W]
    Var logits;    // [B, F*h*w, N]
    std::vector<int> codes;
    Tensor content;    // z'
    Tensor modulated;  // z'' (empty without motion)
  };
  /// lq [B*F, C, H, W]; use_motion selects z_hat = fuse(z', z'') or z_hat = z'.
  Output forward(const Var& lq, int batch, bool use_motion) const;

  VideoClip restore(const VideoClip& lq, bool use_motion) const;
  VideoClip restore(const VideoClip& lq) const { return restore(lq, motion_ready()); }

  ParamSet encoder_params() const { return codec_.encoder_params(); }
  ParamSet predictor_params() const { return predictor_.params(); }
  ParamSet fusion_params() const { return fusion_.params(); }
  ParamSet generator_params() const { return codec_.generator_params(); }
  /// Everything optimized in stage 2 (the bank is excluded).
  ParamSet trainable_params() const;
  /// trainable_params plus the bank, with "codec.", "predictor.", "fusion." prefixes.
  ParamSet all_params() const;

 private:
  RestorationConfig cfg_;
  VqCodec codec_;
  ContentPredictor predictor_;
  FusionModule fusion_;
  std::optional<MotionStatsBank> motion_bank_;
};

/// Codes of the HQ clip under the frozen stage-1 codec.
IndexGrid derive_gt_codes(const VideoClip& hq, const VqCodec& frozen);

DPTC_END_NAMESPACE
