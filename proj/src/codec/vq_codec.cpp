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

#include "codec/vq_codec.hpp"

#include <algorithm>
#include <bit>
#include <limits>

DPTC_BEGIN_NAMESPACE

void FeatureGrid::validate() const {
  check_arg(values.rank() == 4, "feature grid must be f x c x h x w");
  check_arg(values.all_finite(), "feature grid has non-finite values");
}

int CodecConfig::stages() const { return std::countr_zero(static_cast<unsigned>(downscale)); }

void CodecConfig::validate() const {
  if (downscale < 1 || !std::has_single_bit(static_cast<unsigned>(downscale)))
    fail(ErrorCode::kConfig, "downscale must be a power of two");
  const size_t expect = static_cast<size_t>(stages()) + 1;
  if (encoder_channels.size() != expect || generator_channels.size() != expect)
    fail(ErrorCode::kConfig, "encoder/generator channel lists need log2(downscale)+1 entries");
  if (latent_channels < 1) fail(ErrorCode::kConfig, "latent_channels must be positive");
  if (bank_size < 2) fail(ErrorCode::kConfig, "bank_size must be at least 2");
  if (clip_frames < 1) fail(ErrorCode::kConfig, "clip_frames must be positive");
  if (image_channels != 1 && image_channels != 3) fail(ErrorCode::kConfig, "image_channels must be 1 or 3");
  if (frame_attention_heads < 1 || generator_channels.back() % frame_attention_heads != 0)
    fail(ErrorCode::kConfig, "frame_attention_heads must divide the generator latent width");
  if (commitment_beta < 0) fail(ErrorCode::kConfig, "commitment_beta must be non-negative");
}

Encoder::Encoder(const CodecConfig& cfg, Rng& rng) {
  const auto& ch = cfg.encoder_channels;
  stem_ = nn::Conv2d(cfg.image_channels, ch[0], 3, 1, 1, rng);
  for (int i = 0; i < cfg.stages(); ++i)
    down_.emplace_back(ch[static_cast<size_t>(i)], ch[static_cast<size_t>(i) + 1], 3, 2, 1, rng);
  head_ = nn::Conv2d(ch.back(), cfg.latent_channels, 1, 1, 0, rng);
}

Var Encoder::forward(const Var& frames) const {
  Var x = ops::silu(stem_(frames));
  for (const auto& conv : down_) x = ops::silu(conv(x));
  return head_(x);
}

void Encoder::collect(ParamSet& params, const std::string& prefix) const {
  stem_.collect(params, prefix + "stem");
  for (size_t i = 0; i < down_.size(); ++i) down_[i].collect(params, prefix + "down" + std::to_string(i));
  head_.collect(params, prefix + "head");
}

Residual3dBlock::Residual3dBlock(int channels, Rng& rng)
    : conv1(channels, channels, 3, 3, rng), conv2(channels, channels, 3, 3, rng, 0.5) {}

Var Residual3dBlock::operator()(const Var& clip) const {
  return ops::add(clip, conv2(ops::silu(conv1(ops::silu(clip)))));
}

void Residual3dBlock::collect(ParamSet& params, const std::string& prefix) const {
  conv1.collect(params, prefix + ".conv1");
  conv2.collect(params, prefix + ".conv2");
}

FrameAttentionBlock::FrameAttentionBlock(int channels, int heads_, Rng& rng)
    : norm(channels),
      query(channels, channels, rng),
      key(channels, channels, rng),
      value(channels, channels, rng),
      proj(channels, channels, rng),
      heads(heads_) {
  for (Real& v : proj.weight->value.values()) v *= Real(0.5);
}

Var FrameAttentionBlock::operator()(const Var& clip) const {
  const Shape& s = clip->shape();  // [B, F, C, h, w]
  const int b = s[0], f = s[1], c = s[2], h = s[3], w = s[4];
  // [B, F, C, h, w] -> [B, h, w, F, C] -> sequences over frames
  const Var seq = ops::reshape(ops::permute(clip, {0, 3, 4, 1, 2}), Shape{b * h * w, f, c});
  const Var n = norm(seq);
  const Var attended = proj(ops::attention(query(n), key(n), value(n), heads));
  const Var back = ops::permute(ops::reshape(attended, Shape{b, h, w, f, c}), {0, 3, 4, 1, 2});
  return ops::add(clip, back);
}

void FrameAttentionBlock::collect(ParamSet& params, const std::string& prefix) const {
  norm.collect(params, prefix + ".norm");
  query.collect(params, prefix + ".query");
  key.collect(params, prefix + ".key");
  value.collect(params, prefix + ".value");
  proj.collect(params, prefix + ".proj");
}

Generator::Generator(const CodecConfig& cfg, Rng& rng) {
  const auto& ch = cfg.generator_channels;
  const int latent_width = ch.back();
  stem_ = nn::Conv2d(cfg.latent_channels, latent_width, 1, 1, 0, rng);
  for (int i = 0; i < cfg.residual_blocks; ++i) residual_.emplace_back(latent_width, rng);
  for (int i = 0; i < cfg.frame_attention_blocks; ++i)
    attention_.emplace_back(latent_width, cfg.frame_attention_heads, rng);
  for (int i = cfg.stages(); i > 0; --i) {
    const int in = ch[static_cast<size_t>(i)];
    const int out = ch[static_cast<size_t>(i) - 1];
    up_.emplace_back(in, out, 4, 2, 1, rng);
    refine_.emplace_back(out, out, 3, 1, 1, rng);
  }
  out_ = nn::Conv2d(ch.front(), cfg.image_channels, 3, 1, 1, rng, 0.5);
  out_.bias->value.fill(Real(0.5));
}

Var Generator::forward(const Var& latents, int frames) const {
  const Shape& s = latents->shape();
  check_arg(s.size() == 4 && s[0] % frames == 0, "generator: latents must be [B*F, L, h, w]");
  const int batch = s[0] / frames;
  Var x = stem_(latents);
  const int c = x->shape()[1], h = s[2], w = s[3];
  if (!residual_.empty() || !attention_.empty()) {
    x = ops::reshape(x, Shape{batch, frames, c, h, w});
    const size_t blocks = std::max(residual_.size(), attention_.size());
    for (size_t i = 0; i < blocks; ++i) {
      if (i < residual_.size()) x = residual_[i](x);
      if (i < attention_.size()) x = attention_[i](x);
    }
    x = ops::reshape(x, Shape{batch * frames, c, h, w});
  }
  for (size_t i = 0; i < up_.size(); ++i) {
    x = ops::silu(up_[i](ops::silu(x)));
    x = ops::silu(refine_[i](x));
  }
  return out_(x);
}

void Generator::collect(ParamSet& params, const std::string& prefix) const {
  stem_.collect(params, prefix + "stem");
  for (size_t i = 0; i < residual_.size(); ++i) residual_[i].collect(params, prefix + "res" + std::to_string(i));
  for (size_t i = 0; i < attention_.size(); ++i) attention_[i].collect(params, prefix + "fattn" + std::to_string(i));
  for (size_t i = 0; i < up_.size(); ++i) {
    up_[i].collect(params, prefix + "up" + std::to_string(i));
    refine_[i].collect(params, prefix + "refine" + std::to_string(i));
  }
  out_.collect(params, prefix + "out");
}

VqCodec::VqCodec(CodecConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(derive_seed(cfg_.seed, 11));
  encoder_ = Encoder(cfg_, rng);
  generator_ = Generator(cfg_, rng);
  const double bound = 1.0 / cfg_.bank_size;
  Tensor entries(Shape{cfg_.bank_size, cfg_.latent_channels});
  for (Real& v : entries.values()) v = static_cast<Real>(rng.uniform(-bound, bound));
  bank_ = parameter(std::move(entries));
}

ParamSet VqCodec::encoder_params() const {
  ParamSet p;
  encoder_.collect(p, "encoder.");
  return p;
}

ParamSet VqCodec::generator_params() const {
  ParamSet p;
  generator_.collect(p, "generator.");
  return p;
}

ParamSet VqCodec::all_params() const {
  ParamSet p = encoder_params();
  p.append(generator_params());
  p.add("bank", bank_);
  return p;
}

VqCodec VqCodec::clone() const {
  VqCodec copy(cfg_);
  const ParamSet src = all_params();
  const ParamSet dst = copy.all_params();
  for (size_t i = 0; i < src.size(); ++i) dst.items()[i].second->value = src.items()[i].second->value;
  return copy;
}

Tensor stack_clips(const std::vector<const VideoClip*>& clips) {
  check_arg(!clips.empty(), "stack_clips: empty batch");
  const VideoClip& first = *clips.front();
  Tensor out(Shape{static_cast<int>(clips.size()) * first.frame_count(), first.channels(), first.height(), first.width()});
  const std::int64_t per_clip = first.frames.numel();
  for (size_t i = 0; i < clips.size(); ++i) {
    check_arg(same_geometry(*clips[i], first), "stack_clips: clips differ in geometry");
    std::copy_n(clips[i]->frames.data(), per_clip, out.data() + static_cast<std::int64_t>(i) * per_clip);
  }
  return out;
}

Var grid_to_tokens(const Var& grid) {
  const Shape& s = grid->shape();
  return ops::reshape(ops::permute(grid, {0, 2, 3, 1}), Shape{s[0] * s[2] * s[3], s[1]});
}

Var tokens_to_grid(const Var& tokens, int n, int h, int w) {
  const int c = tokens->shape().back();
  return ops::permute(ops::reshape(tokens, Shape{n, h, w, c}), {0, 3, 1, 2});
}

std::vector<int> nearest_codes(const Tensor& tokens, const Tensor& bank) {
  check_arg(bank.rank() == 2 && bank.dim(0) >= 1, "nearest_codes: empty bank");
  const int d = bank.dim(1);
  const int n = bank.dim(0);
  check_arg(tokens.dim(-1) == d, "nearest_codes: token width does not match bank");
  const std::int64_t count = tokens.numel() / d;
  std::vector<int> codes(static_cast<size_t>(count));
  for (std::int64_t t = 0; t < count; ++t) {
    const Real* z = tokens.data() + t * d;
    double best = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i < n; ++i) {
      const Real* e = bank.data() + static_cast<std::int64_t>(i) * d;
      double dist = 0.0;
      for (int c = 0; c < d; ++c) {
        const double diff = static_cast<double>(z[c]) - e[c];
        dist += diff * diff;
      }
      if (dist < best) {
        best = dist;
        best_i = i;
      }
    }
    codes[static_cast<size_t>(t)] = best_i;
  }
  return codes;
}

FeatureGrid encode(const VideoClip& clip, const VqCodec& codec) {
  const auto& cfg = codec.config();
  const VideoClip input = cfg.image_channels == 3 ? to_rgb(clip) : to_gray(clip);
  if (input.height() % cfg.downscale != 0 || input.width() % cfg.downscale != 0)
    fail(ErrorCode::kInvalidArgument, "clip size " + std::to_string(input.height()) + "x" +
                                          std::to_string(input.width()) + " not divisible by downscale " +
                                          std::to_string(cfg.downscale));
  NoGradGuard no_grad;
  const Var z = codec.encoder().forward(constant(input.frames));
  return FeatureGrid(z->value, cfg.downscale);
}

std::pair<IndexGrid, FeatureGrid> quantize(const FeatureGrid& z, const VisionBank& bank) {
  check_arg(bank.entries.rank() == 2 && bank.size() >= 1, "quantize: empty bank");
  check_arg(bank.dim() == z.channels(), "quantize: bank dimension does not match latent channels");
  NoGradGuard no_grad;
  const Var tokens = grid_to_tokens(constant(z.values));
  const auto codes = nearest_codes(tokens->value, bank.entries);
  IndexGrid grid(z.frames(), z.height(), z.width());
  grid.codes = codes;
  return {grid, lookup(bank, grid, z.downscale)};
}

FeatureGrid lookup(const VisionBank& bank, const IndexGrid& codes, int downscale) {
  const int n = bank.size();
  const int d = bank.dim();
  const int plane = codes.height * codes.width;
  Tensor out(Shape{codes.frames, d, codes.height, codes.width});
  for (int f = 0; f < codes.frames; ++f)
    for (int p = 0; p < plane; ++p) {
      const int code = codes.codes[static_cast<size_t>(f * plane + p)];
      check_arg(code >= 0 && code < n, "lookup: code " + std::to_string(code) + " out of range [0," +
                                           std::to_string(n) + ")");
      const Real* e = bank.row(code);
      for (int c = 0; c < d; ++c) out[(static_cast<std::int64_t>(f) * d + c) * plane + p] = e[c];
    }
  return FeatureGrid(std::move(out), downscale);
}

VideoClip decode(const FeatureGrid& features, const VqCodec& codec) {
  const auto& cfg = codec.config();
  check_arg(features.channels() == cfg.latent_channels, "decode: feature channels do not match codec");
  NoGradGuard no_grad;
  const Var out = ops::clamp(codec.generator().forward(constant(features.values), features.frames()), Real(0), Real(1));
  return VideoClip(out->value);
}

VideoClip reconstruct(const VideoClip& clip, const VqCodec& codec) {
  const auto [codes, zq] = quantize(encode(clip, codec), codec.vision_bank());
  return decode(zq, codec);
}

DPTC_END_NAMESPACE
