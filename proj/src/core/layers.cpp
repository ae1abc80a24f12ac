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

#include "core/layers.hpp"

#include <cmath>

DPTC_BEGIN_NAMESPACE

namespace nn {

Tensor init_uniform(Shape shape, int fan_in, Rng& rng, double gain) {
  Tensor t(std::move(shape));
  const double bound = gain * std::sqrt(3.0 / std::max(fan_in, 1));
  for (Real& v : t.values()) v = static_cast<Real>(rng.uniform(-bound, bound));
  return t;
}

Linear::Linear(int in, int out, Rng& rng, bool zero_init)
    : weight(parameter(zero_init ? Tensor(Shape{in, out}) : init_uniform(Shape{in, out}, in, rng))),
      bias(parameter(Tensor(Shape{out}))) {}

void Linear::collect(ParamSet& params, const std::string& prefix) const {
  params.add(prefix + ".weight", weight);
  params.add(prefix + ".bias", bias);
}

LayerNorm::LayerNorm(int dim) : gamma(parameter(Tensor(Shape{dim}, Real(1)))), beta(parameter(Tensor(Shape{dim}))) {}

void LayerNorm::collect(ParamSet& params, const std::string& prefix) const {
  params.add(prefix + ".gamma", gamma);
  params.add(prefix + ".beta", beta);
}

Conv2d::Conv2d(int in, int out, int kernel, int stride_, int pad_, Rng& rng, double gain)
    : weight(parameter(init_uniform(Shape{out, in, kernel, kernel}, in * kernel * kernel, rng, gain))),
      bias(parameter(Tensor(Shape{out}))),
      stride(stride_),
      pad(pad_) {}

void Conv2d::collect(ParamSet& params, const std::string& prefix) const {
  params.add(prefix + ".weight", weight);
  params.add(prefix + ".bias", bias);
}

ConvTranspose2d::ConvTranspose2d(int in, int out, int kernel, int stride_, int pad_, Rng& rng)
    // each output pixel receives in * (kernel/stride)^2 contributions
    : weight(parameter(init_uniform(Shape{in, out, kernel, kernel},
                                    in * (kernel / stride_) * (kernel / stride_), rng))),
      bias(parameter(Tensor(Shape{out}))),
      stride(stride_),
      pad(pad_) {}

void ConvTranspose2d::collect(ParamSet& params, const std::string& prefix) const {
  params.add(prefix + ".weight", weight);
  params.add(prefix + ".bias", bias);
}

Conv3d::Conv3d(int in, int out, int temporal_kernel, int kernel, Rng& rng, double gain)
    : weight(parameter(init_uniform(Shape{out, in, temporal_kernel, kernel, kernel},
                                    in * temporal_kernel * kernel * kernel, rng, gain))),
      bias(parameter(Tensor(Shape{out}))) {}

void Conv3d::collect(ParamSet& params, const std::string& prefix) const {
  params.add(prefix + ".weight", weight);
  params.add(prefix + ".bias", bias);
}

SelfAttentionBlock::SelfAttentionBlock(int dim, int heads_, int ffn_mult, Rng& rng)
    : norm1(dim),
      norm2(dim),
      query(dim, dim, rng),
      key(dim, dim, rng),
      value(dim, dim, rng),
      proj(dim, dim, rng),
      ffn_in(dim, dim * ffn_mult, rng),
      ffn_out(dim * ffn_mult, dim, rng),
      heads(heads_) {}

Var SelfAttentionBlock::operator()(const Var& x, ops::AttentionProbe* probe) const {
  const Var h = norm1(x);
  const Var attended = ops::attention(query(h), key(h), value(h), heads, probe);
  const Var x1 = ops::add(x, proj(attended));
  return ops::add(x1, ffn_out(ops::gelu(ffn_in(norm2(x1)))));
}

void SelfAttentionBlock::collect(ParamSet& params, const std::string& prefix) const {
  norm1.collect(params, prefix + ".norm1");
  query.collect(params, prefix + ".query");
  key.collect(params, prefix + ".key");
  value.collect(params, prefix + ".value");
  proj.collect(params, prefix + ".proj");
  norm2.collect(params, prefix + ".norm2");
  ffn_in.collect(params, prefix + ".ffn_in");
  ffn_out.collect(params, prefix + ".ffn_out");
}

CrossAttentionBlock::CrossAttentionBlock(int dim, int heads_, int ffn_mult, Rng& rng)
    : norm_q(dim),
      norm_kv(dim),
      norm_ffn(dim),
      query(dim, dim, rng),
      key(dim, dim, rng),
      value(dim, dim, rng),
      proj(dim, dim, rng, /*zero_init=*/true),
      ffn_in(dim, dim * ffn_mult, rng),
      ffn_out(dim * ffn_mult, dim, rng, /*zero_init=*/true),
      heads(heads_) {}

Var CrossAttentionBlock::operator()(const Var& x, const Var& context, ops::AttentionProbe* probe) const {
  const Var qn = norm_q(x);
  const Var cn = norm_kv(context);
  const Var attended = ops::attention(query(qn), key(cn), value(cn), heads, probe);
  const Var x1 = ops::add(x, proj(attended));
  return ops::add(x1, ffn_out(ops::gelu(ffn_in(norm_ffn(x1)))));
}

void CrossAttentionBlock::collect(ParamSet& params, const std::string& prefix) const {
  norm_q.collect(params, prefix + ".norm_q");
  norm_kv.collect(params, prefix + ".norm_kv");
  query.collect(params, prefix + ".query");
  key.collect(params, prefix + ".key");
  value.collect(params, prefix + ".value");
  proj.collect(params, prefix + ".proj");
  norm_ffn.collect(params, prefix + ".norm_ffn");
  ffn_in.collect(params, prefix + ".ffn_in");
  ffn_out.collect(params, prefix + ".ffn_out");
}

}  // namespace nn

DPTC_END_NAMESPACE
