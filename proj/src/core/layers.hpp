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

#include <string>
#include <vector>

#include "core/ops.hpp"
#include "core/rng.hpp"

DPTC_BEGIN_NAMESPACE

namespace nn {

/// Uniform(-bound, bound) initialized tensor, bound = gain * sqrt(3 / fan_in).
Tensor init_uniform(Shape shape, int fan_in, Rng& rng, double gain = 1.0);

struct Linear {
  Var weight;  // [in, out]
  Var bias;    // [out]

  Linear() = default;
  Linear(int in, int out, Rng& rng, bool zero_init = false);
  Var operator()(const Var& x) const { return ops::linear(x, weight, bias); }
  void collect(ParamSet& params, const std::string& prefix) const;
};

struct LayerNorm {
  Var gamma, beta;

  LayerNorm() = default;
  explicit LayerNorm(int dim);
  Var operator()(const Var& x) const { return ops::layer_norm(x, gamma, beta); }
  void collect(ParamSet& params, const std::string& prefix) const;
};

struct Conv2d {
  Var weight;  // [out, in, k, k]
  Var bias;
  int stride = 1;
  int pad = 0;

  Conv2d() = default;
  Conv2d(int in, int out, int kernel, int stride, int pad, Rng& rng, double gain = 1.0);
  Var operator()(const Var& x) const { return ops::conv2d(x, weight, bias, stride, pad); }
  void collect(ParamSet& params, const std::string& prefix) const;
};

struct ConvTranspose2d {
  Var weight;  // [in, out, k, k]
  Var bias;
  int stride = 2;
  int pad = 1;

  ConvTranspose2d() = default;
  ConvTranspose2d(int in, int out, int kernel, int stride, int pad, Rng& rng);
  Var operator()(const Var& x) const { return ops::conv_transpose2d(x, weight, bias, stride, pad); }
  void collect(ParamSet& params, const std::string& prefix) const;
};

struct Conv3d {
  Var weight;  // [out, in, kt, k, k]
  Var bias;

  Conv3d() = default;
  Conv3d(int in, int out, int temporal_kernel, int kernel, Rng& rng, double gain = 1.0);
  /// x is [B, F, C, H, W].
  Var operator()(const Var& x) const { return ops::conv3d(x, weight, bias); }
  void collect(ParamSet& params, const std::string& prefix) const;
};

/// Pre-norm transformer block with self-attention over each sequence of [S, T, D].
struct SelfAttentionBlock {
  LayerNorm norm1, norm2;
  Linear query, key, value, proj;
  Linear ffn_in, ffn_out;
  int heads = 1;

  SelfAttentionBlock() = default;
  SelfAttentionBlock(int dim, int heads, int ffn_mult, Rng& rng);
  Var operator()(const Var& x, ops::AttentionProbe* probe = nullptr) const;
  void collect(ParamSet& params, const std::string& prefix) const;
};

/// Pre-norm block where `x` queries `context`. Output projections start at
/// zero, so a fresh block is the identity on `x`.
struct CrossAttentionBlock {
  LayerNorm norm_q, norm_kv, norm_ffn;
  Linear query, key, value, proj;
  Linear ffn_in, ffn_out;
  int heads = 1;

  CrossAttentionBlock() = default;
  CrossAttentionBlock(int dim, int heads, int ffn_mult, Rng& rng);
  Var operator()(const Var& x, const Var& context, ops::AttentionProbe* probe = nullptr) const;
  void collect(ParamSet& params, const std::string& prefix) const;
};

}  // namespace nn

DPTC_END_NAMESPACE
