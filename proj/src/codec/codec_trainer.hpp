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
#include <memory>
#include <string>
#include <vector>

#include "codec/perceptual.hpp"
#include "codec/vq_codec.hpp"
#include "core/optim.hpp"

DPTC_BEGIN_NAMESPACE

struct CodecTrainOptions {
  int steps = 2000;
  int batch_size = 4;
  double lr = 2e-3;
  double perceptual_weight = 1.0;
  double grad_clip = 1.0;
  /// Seed the bank from encoder tokens of the first batch.
  bool data_init = true;
  std::string feature_extractor = "random_conv_pyramid";
  std::uint64_t seed = 0;

  void validate() const;
};

struct CodecLossRecord {
  std::int64_t step = 0;
  double recon_l1 = 0;
  double perceptual = 0;
  double codebook = 0;
  double commitment = 0;
  double total = 0;
  int codes_used = 0;
  int codes_reset = 0;
};

/// Differentiable stage-1 forward pass on a stacked batch [B*F, C, H, W].
struct CodecForward {
  Var reconstruction;  // unclamped generator output
  Var codebook_loss;   // mse(sg(z), e); null under EMA updates
  Var commitment_loss; // beta * mse(z, sg(e))
  Var latents;         // encoder output [B*F, L, h, w]
  std::vector<int> codes;
};

CodecForward codec_forward(const VqCodec& codec, const Var& frames, int frames_per_clip);

/// Stage-1 objective: L1 + weighted perceptual reconstruction terms plus the
/// codebook and commitment terms of codec_forward.
struct CodecLoss {
  CodecForward forward;
  Var recon;
  Var perceptual;
  Var total;
};
CodecLoss codec_loss(const VqCodec& codec, const Var& frames, int frames_per_clip, const FeatureExtractor& phi,
                     double perceptual_weight);

/// Stage-1 trainer: straight-through VQ autoencoding of HQ clips.
class CodecTrainer {
 public:
  CodecTrainer(VqCodec& codec, CodecTrainOptions options);

  CodecLossRecord step(const std::vector<const VideoClip*>& batch);

  std::int64_t step_count() const noexcept { return steps_; }
  Adam& optimizer() noexcept { return optimizer_; }
  const CodecTrainOptions& options() const noexcept { return options_; }

  void save_state(Checkpoint& ckpt) const;
  void load_state(const Checkpoint& ckpt);

 private:
  void init_bank_from(const Tensor& tokens);
  void ema_update(const Tensor& tokens, const std::vector<int>& codes);
  int reseed_dead_codes(const Tensor& tokens);

  VqCodec& codec_;
  CodecTrainOptions options_;
  std::unique_ptr<FeatureExtractor> phi_;
  Adam optimizer_;
  Rng rng_;
  std::int64_t steps_ = 0;
  std::vector<std::int64_t> last_used_;
  Tensor ema_count_;  // [N]
  Tensor ema_sum_;    // [N, L]
};

/// Draws `batch_size` distinct indices in [0, n) (with repeats when n < batch_size).
std::vector<int> sample_batch(Rng& rng, int n, int batch_size);

DPTC_END_NAMESPACE
