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

#include <vector>

#include "core/autograd.hpp"

// Differentiable tensor operations. Layout conventions:
//   images   [N, C, H, W]
//   clips    [B, F, C, H, W]  (same memory as [B*F, C, H, W])
//   tokens   [S, T, D]
DPTC_BEGIN_NAMESPACE

namespace ops {

// Elementwise.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, Real s);
Var add_scalar(const Var& a, Real s);
Var silu(const Var& a);
Var gelu(const Var& a);
Var sigmoid(const Var& a);
/// Clamps to [lo, hi]; gradient is zero where clamping is active.
Var clamp(const Var& a, Real lo, Real hi);
/// log(clamp(a, lo, hi)).
Var log_clamped(const Var& a, Real lo, Real hi);

// Shape.
Var reshape(const Var& a, Shape shape);
Var permute(const Var& a, const std::vector<int>& order);
Var detach(const Var& a);
/// Value of `quantized`, gradient routed to `source` unchanged.
Var straight_through(const Var& source, const Var& quantized);
/// Rows of `table` [N, D] selected by `rows`; result [rows.size(), D].
Var gather_rows(const Var& table, const std::vector<int>& rows);

// Reductions and losses. Scalar results have rank 0.
Var sum(const Var& a);
Var mean(const Var& a);
/// Mean over every axis but the first; result [B].
Var mean_per_sample(const Var& a);
Var l1_loss(const Var& a, const Var& b);
Var mse_loss(const Var& a, const Var& b);
/// Mean token cross-entropy of logits [..., N] against class ids.
Var cross_entropy(const Var& logits, const std::vector<int>& targets);

// Dense layers.
/// x [..., in] times w [in, out] plus optional b [out].
Var linear(const Var& x, const Var& w, const Var& b);
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, Real eps = Real(1e-5));
/// Adds a factorized position table to x [B, F*HW, D]: temporal [F, D] + spatial [HW, D].
Var add_position(const Var& x, const Var& temporal, const Var& spatial);

// Convolutions (cross-correlation, zero padding).
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
/// w has layout [C_in, C_out, k, k].
Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
/// x [B, F, C, H, W], w [O, C, kt, kh, kw]; stride 1, "same" padding in every axis.
Var conv3d(const Var& x, const Var& w, const Var& b);

/// Records softmax probabilities [S, heads, Tq, Tk] of one attention call.
struct AttentionProbe {
  Tensor probs;
};

/// Multi-head scaled dot-product attention over S independent sequences.
/// q [S, Tq, D], k and v [S, Tk, D]; D divisible by heads.
Var attention(const Var& q, const Var& k, const Var& v, int heads, AttentionProbe* probe = nullptr);

}  // namespace ops

DPTC_END_NAMESPACE
