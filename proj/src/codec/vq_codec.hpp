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
#include <utility>
#include <vector>

#include "core/layers.hpp"
#include "media/video_clip.hpp"

DPTC_BEGIN_NAMESPACE

/// Latent block f x c x h x w for one clip (h = H / downscale).
struct FeatureGrid {
  Tensor values;
  int downscale = 1;

  FeatureGrid() = default;
  FeatureGrid(Tensor v, int s) : values(std::move(v)), downscale(s) {}

  int frames() const { return values.dim(0); }
  int channels() const { return values.dim(1); }
  int height() const { return values.dim(2); }
  int width() const { return values.dim(3); }
  int token_count() const { return frames() * height() * width(); }
  void validate() const;
};

/// Codebook of N entries of dimension d.
struct VisionBank {
  Tensor entries;  // [N, d]

  int size() const { return entries.dim(0); }
  int dim() const { return entries.dim(1); }
  const Real* row(int i) const { return entries.data() + static_cast<std::int64_t>(i) * dim(); }
};

/// Per-token codebook indices, row-major over (f, y, x).
struct IndexGrid {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<int> codes;

  IndexGrid() = default;
  IndexGrid(int f, int h, int w) : frames(f), height(h), width(w), codes(static_cast<size_t>(f) * h * w, 0) {}
  int& at(int f, int y, int x) { return codes[static_cast<size_t>((f * height + y) * width + x)]; }
  int at(int f, int y, int x) const { return codes[static_cast<size_t>((f * height + y) * width + x)]; }
  bool operator==(const IndexGrid&) const = default;
};

struct CodecConfig {
  int latent_channels = 64;
  int downscale = 8;
  int bank_size = 1024;
  int clip_frames = 8;
  double commitment_beta = 0.25;
  int image_channels = 3;
  /// Width at full resolution followed by the width after each stride-2 stage;
  /// length log2(downscale) + 1.
  std::vector<int> encoder_channels{32, 64, 64, 64};
  std::vector<int> generator_channels{32, 64, 64, 64};
  int residual_blocks = 2;
  int frame_attention_blocks = 1;
  int frame_attention_heads = 4;
  bool ema_codebook = false;
  double ema_decay = 0.99;
  int dead_code_steps = 2000;
  std::uint64_t seed = 0;

  void validate() const;
  int stages() const;
};

/// Per-frame 2D convolutional encoder.
class Encoder {
 public:
  Encoder() = default;
  Encoder(const CodecConfig& cfg, Rng& rng);
  /// frames [N, C, H, W] -> latents [N, L, H/s, W/s].
  Var forward(const Var& frames) const;
  void collect(ParamSet& params, const std::string& prefix) const;

 private:
  nn::Conv2d stem_;
  std::vector<nn::Conv2d> down_;
  nn::Conv2d head_;
};

/// 3D residual block: x + conv(silu(conv(silu(x)))) with 3x3x3 kernels.
struct Residual3dBlock {
  nn::Conv3d conv1, conv2;

  Residual3dBlock() = default;
  Residual3dBlock(int channels, Rng& rng);
  Var operator()(const Var& clip) const;
  void collect(ParamSet& params, const std::string& prefix) const;
};

/// Attention along the frame axis at every spatial location, with residual.
struct FrameAttentionBlock {
  nn::LayerNorm norm;
  nn::Linear query, key, value, proj;
  int heads = 1;

  FrameAttentionBlock() = default;
  FrameAttentionBlock(int channels, int heads, Rng& rng);
  /// clip [B, F, C, h, w].
  Var operator()(const Var& clip) const;
  void collect(ParamSet& params, const std::string& prefix) const;
};

/// Decoder: latent stem, interleaved 3D residual and frame-attention blocks,
/// then transposed-convolution upsampling to pixels.
class Generator {
 public:
  Generator() = default;
  Generator(const CodecConfig& cfg, Rng& rng);
  /// latents [B*F, L, h, w] -> frames [B*F, C, H, W] (unclamped).
  Var forward(const Var& latents, int frames) const;
  void collect(ParamSet& params, const std::string& prefix) const;

  std::vector<Residual3dBlock>& residual_blocks() { return residual_; }
  std::vector<FrameAttentionBlock>& attention_blocks() { return attention_; }

 private:
  nn::Conv2d stem_;
  std::vector<Residual3dBlock> residual_;
  std::vector<FrameAttentionBlock> attention_;
  std::vector<nn::ConvTranspose2d> up_;
  std::vector<nn::Conv2d> refine_;
  nn::Conv2d out_;
};

/// Encoder, generator and vision bank of the vector-quantized video codec.
class VqCodec {
 public:
  explicit VqCodec(CodecConfig cfg);

  const CodecConfig& config() const noexcept { return cfg_; }
  const Encoder& encoder() const noexcept { return encoder_; }
  Generator& generator() noexcept { return generator_; }
  const Generator& generator() const noexcept { return generator_; }
  const Var& bank() const noexcept { return bank_; }
  VisionBank vision_bank() const { return VisionBank{bank_->value}; }

  ParamSet encoder_params() const;
  ParamSet generator_params() const;
  /// Every parameter, prefixed "encoder.", "generator." and "bank".
  ParamSet all_params() const;

  /// Independent copy with equal parameter values.
  VqCodec clone() const;

 private:
  CodecConfig cfg_;
  Encoder encoder_;
  Generator generator_;
  Var bank_;
};

/// Stacks clips into [B*F, C, H, W]; all clips must share geometry.
Tensor stack_clips(const std::vector<const VideoClip*>& clips);
/// [B*F, L, h, w] <-> tokens [B*F*h*w, L] ordered (clip, f, y, x).
Var grid_to_tokens(const Var& grid);
Var tokens_to_grid(const Var& tokens, int n, int h, int w);

/// Nearest entry per token row in squared Euclidean distance, lowest index on ties.
std::vector<int> nearest_codes(const Tensor& tokens, const Tensor& bank);

FeatureGrid encode(const VideoClip& clip, const VqCodec& codec);
std::pair<IndexGrid, FeatureGrid> quantize(const FeatureGrid& z, const VisionBank& bank);
FeatureGrid lookup(const VisionBank& bank, const IndexGrid& codes, int downscale = 1);
VideoClip decode(const FeatureGrid& features, const VqCodec& codec);
/// decode(lookup(quantize(encode(clip)))).
VideoClip reconstruct(const VideoClip& clip, const VqCodec& codec);

DPTC_END_NAMESPACE
