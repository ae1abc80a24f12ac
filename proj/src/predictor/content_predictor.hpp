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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "codec/vq_codec.hpp"

DPTC_BEGIN_NAMESPACE

enum class AttentionMode { kSpatialTemporal, kSpatialOnly };

std::string to_string(AttentionMode mode);
AttentionMode parse_attention_mode(const std::string& text);

struct PredictorConfig {
  int blocks = 6;
  int d_model = 256;
  int heads = 8;
  int ffn_mult = 4;
  AttentionMode mode = AttentionMode::kSpatialTemporal;
  /// Token geometry the position tables are built for.
  int frames = 8;
  int height = 8;
  int width = 8;
  int latent_channels = 64;
  int bank_size = 1024;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-token logits, [f, h, w, N].
struct LogitsGrid {
  Tensor values;

  int frames() const { return values.dim(0); }
  int height() const { return values.dim(1); }
  int width() const { return values.dim(2); }
  int classes() const { return values.dim(3); }
};

/// Transformer over degraded tokens that classifies each one into a bank entry.
class ContentPredictor {
 public:
  explicit ContentPredictor(PredictorConfig cfg);

  const PredictorConfig& config() const noexcept { return cfg_; }

  /// latents [B*F, L, h, w] -> logits [B, F*h*w, N], tokens ordered (f, y, x).
  /// `probe`, if given, receives the last block's attention probabilities.
  Var forward(const Var& latents, int batch, AttentionMode mode, ops::AttentionProbe* probe = nullptr) const;
  Var forward(const Var& latents, int batch, ops::AttentionProbe* probe = nullptr) const {
    return forward(latents, batch, cfg_.mode, probe);
  }

  ParamSet params() const;
  const Var& temporal_position() const noexcept { return temporal_pos_; }
  const Var& spatial_position() const noexcept { return spatial_pos_; }

 private:
  PredictorConfig cfg_;
  nn::Linear in_proj_;
  Var temporal_pos_;  // [f, d]
  Var spatial_pos_;   // [h*w, d]
  std::vector<nn::SelfAttentionBlock> blocks_;
  nn::LayerNorm final_norm_;
  nn::Linear head_;
};

LogitsGrid predict_logits(const FeatureGrid& z, const ContentPredictor& predictor, AttentionMode mode);
inline LogitsGrid predict_logits(const FeatureGrid& z, const ContentPredictor& predictor) {
  return predict_logits(z, predictor, predictor.config().mode);
}

/// Per-token argmax, lowest index on ties.
IndexGrid predict_indices(const LogitsGrid& logits);
/// Argmax along the last axis of a [..., N] tensor.
std::vector<int> argmax_rows(const Tensor& logits);

struct ContentPrediction {
  FeatureGrid content;
  IndexGrid codes;
  LogitsGrid logits;
};

ContentPrediction predict_content(const FeatureGrid& z, const ContentPredictor& predictor, const VisionBank& bank);

/// Last-block attention of the token at `query` = (f, y, x), averaged over
/// heads; one [h, w] map per frame. The maps jointly sum to 1.
std::vector<Tensor> export_attention_maps(const FeatureGrid& z, const ContentPredictor& predictor,
                                          std::array<int, 3> query, AttentionMode mode);
inline std::vector<Tensor> export_attention_maps(const FeatureGrid& z, const ContentPredictor& predictor,
                                                 std::array<int, 3> query) {
  return export_attention_maps(z, predictor, query, predictor.config().mode);
}

DPTC_END_NAMESPACE
