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

#include "predictor/content_predictor.hpp"

DPTC_BEGIN_NAMESPACE

std::string to_string(AttentionMode mode) {
  return mode == AttentionMode::kSpatialOnly ? "spatial_only" : "spatial_temporal";
}

AttentionMode parse_attention_mode(const std::string& text) {
  if (text == "spatial_temporal") return AttentionMode::kSpatialTemporal;
  if (text == "spatial_only") return AttentionMode::kSpatialOnly;
  fail(ErrorCode::kConfig, "unknown attention mode '" + text + "'");
}

void PredictorConfig::validate() const {
  if (blocks < 1) fail(ErrorCode::kConfig, "predictor_blocks must be at least 1");
  if (d_model < 1 || heads < 1 || d_model % heads != 0) fail(ErrorCode::kConfig, "heads must divide d_model");
  if (ffn_mult < 1) fail(ErrorCode::kConfig, "ffn_mult must be at least 1");
  if (frames < 1 || height < 1 || width < 1) fail(ErrorCode::kConfig, "predictor token geometry must be positive");
  if (latent_channels < 1 || bank_size < 1) fail(ErrorCode::kConfig, "predictor widths must be positive");
}

ContentPredictor::ContentPredictor(PredictorConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(derive_seed(cfg_.seed, 31));
  in_proj_ = nn::Linear(cfg_.latent_channels, cfg_.d_model, rng);
  Tensor t(Shape{cfg_.frames, cfg_.d_model});
  Tensor s(Shape{cfg_.height * cfg_.width, cfg_.d_model});
  for (Real& v : t.values()) v = static_cast<Real>(0.02 * rng.normal());
  for (Real& v : s.values()) v = static_cast<Real>(0.02 * rng.normal());
  temporal_pos_ = parameter(std::move(t));
  spatial_pos_ = parameter(std::move(s));
  for (int i = 0; i < cfg_.blocks; ++i) blocks_.emplace_back(cfg_.d_model, cfg_.heads, cfg_.ffn_mult, rng);
  final_norm_ = nn::LayerNorm(cfg_.d_model);
  head_ = nn::Linear(cfg_.d_model, cfg_.bank_size, rng);
}

Var ContentPredictor::forward(const Var& latents, int batch, AttentionMode mode, ops::AttentionProbe* probe) const {
  const Shape& s = latents->shape();
  check_arg(s.size() == 4 && batch >= 1 && s[0] == batch * cfg_.frames, "predictor: latents must be [B*F, L, h, w]");
  if (s[1] != cfg_.latent_channels || s[2] != cfg_.height || s[3] != cfg_.width)
    fail(ErrorCode::kInvalidArgument, "predictor: token geometry " + shape_to_string(s) +
                                          " does not match position tables (" + std::to_string(cfg_.frames) + "x" +
                                          std::to_string(cfg_.height) + "x" + std::to_string(cfg_.width) + ")");
  const int hw = cfg_.height * cfg_.width;
  const int tokens = cfg_.frames * hw;
  Var x = ops::reshape(ops::permute(latents, {0, 2, 3, 1}), Shape{batch, tokens, cfg_.latent_channels});
  x = ops::add_position(in_proj_(x), temporal_pos_, spatial_pos_);
  // Per-frame sequences give exact block-diagonal attention.
  if (mode == AttentionMode::kSpatialOnly) x = ops::reshape(x, Shape{batch * cfg_.frames, hw, cfg_.d_model});
  for (size_t i = 0; i < blocks_.size(); ++i) x = blocks_[i](x, i + 1 == blocks_.size() ? probe : nullptr);
  x = ops::reshape(x, Shape{batch, tokens, cfg_.d_model});
  return head_(final_norm_(x));
}

ParamSet ContentPredictor::params() const {
  ParamSet p;
  in_proj_.collect(p, "in_proj");
  p.add("pos.temporal", temporal_pos_);
  p.add("pos.spatial", spatial_pos_);
  for (size_t i = 0; i < blocks_.size(); ++i) blocks_[i].collect(p, "block" + std::to_string(i));
  final_norm_.collect(p, "final_norm");
  head_.collect(p, "head");
  return p;
}

LogitsGrid predict_logits(const FeatureGrid& z, const ContentPredictor& predictor, AttentionMode mode) {
  NoGradGuard no_grad;
  const Var logits = predictor.forward(constant(z.values), 1, mode);
  return LogitsGrid{logits->value.reshaped(Shape{z.frames(), z.height(), z.width(), predictor.config().bank_size})};
}

std::vector<int> argmax_rows(const Tensor& logits) {
  const int n = logits.dim(-1);
  const std::int64_t rows = logits.numel() / n;
  std::vector<int> out(static_cast<size_t>(rows));
  for (std::int64_t r = 0; r < rows; ++r) {
    const Real* row = logits.data() + r * n;
    int best = 0;
    for (int i = 1; i < n; ++i)
      if (row[i] > row[best]) best = i;
    out[static_cast<size_t>(r)] = best;
  }
  return out;
}

IndexGrid predict_indices(const LogitsGrid& logits) {
  check_arg(logits.values.rank() == 4, "predict_indices: logits must be f x h x w x N");
  IndexGrid grid(logits.frames(), logits.height(), logits.width());
  grid.codes = argmax_rows(logits.values);
  return grid;
}

ContentPrediction predict_content(const FeatureGrid& z, const ContentPredictor& predictor, const VisionBank& bank) {
  if (bank.size() != predictor.config().bank_size)
    fail(ErrorCode::kInvalidArgument, "predict_content: bank has " + std::to_string(bank.size()) +
                                          " entries but the classifier has " +
                                          std::to_string(predictor.config().bank_size));
  ContentPrediction out;
  out.logits = predict_logits(z, predictor);
  out.codes = predict_indices(out.logits);
  out.content = lookup(bank, out.codes, z.downscale);
  return out;
}

std::vector<Tensor> export_attention_maps(const FeatureGrid& z, const ContentPredictor& predictor,
                                          std::array<int, 3> query, AttentionMode mode) {
  const auto [qf, qy, qx] = query;
  if (qf < 0 || qf >= z.frames() || qy < 0 || qy >= z.height() || qx < 0 || qx >= z.width())
    fail(ErrorCode::kInvalidArgument, "attention query position out of range");
  ops::AttentionProbe probe;
  {
    NoGradGuard no_grad;
    predictor.forward(constant(z.values), 1, mode, &probe);
  }
  const int frames = z.frames(), h = z.height(), w = z.width(), hw = h * w;
  const Tensor& p = probe.probs;  // [S, heads, Tq, Tk]
  const int heads = p.dim(1), tq = p.dim(2), tk = p.dim(3);
  const int seq = mode == AttentionMode::kSpatialOnly ? qf : 0;
  const int row = mode == AttentionMode::kSpatialOnly ? qy * w + qx : (qf * h + qy) * w + qx;
  const int frame_offset = mode == AttentionMode::kSpatialOnly ? qf : 0;

  std::vector<Tensor> maps(static_cast<size_t>(frames), Tensor(Shape{h, w}));
  for (int hd = 0; hd < heads; ++hd) {
    const Real* probs = p.data() + ((static_cast<std::int64_t>(seq) * heads + hd) * tq + row) * tk;
    for (int k = 0; k < tk; ++k) {
      const int f = frame_offset + k / hw;
      maps[static_cast<size_t>(f)][k % hw] += probs[k] / static_cast<Real>(heads);
    }
  }
  return maps;
}

DPTC_END_NAMESPACE
