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

#include <cmath>

#include "core/ops.hpp"
#include "core/ops_internal.hpp"

DPTC_BEGIN_NAMESPACE

namespace ops {

namespace {

using StridedMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;
using MutableStridedMap = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;

void softmax_rows(RowMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const Real mx = row.maxCoeff();
    row = (row.array() - mx).exp();
    row /= row.sum();
  }
}

}  // namespace

Var attention(const Var& q, const Var& k, const Var& v, int heads, AttentionProbe* probe) {
  check_arg(q->value.rank() == 3 && k->value.rank() == 3 && v->value.rank() == 3,
            "attention: q, k, v must be [S, T, D]");
  const int s = q->value.dim(0);
  const int tq = q->value.dim(1);
  const int d = q->value.dim(2);
  const int tk = k->value.dim(1);
  check_arg(k->value.dim(0) == s && v->value.dim(0) == s && k->value.dim(2) == d && v->value.dim(2) == d &&
                v->value.dim(1) == tk,
            "attention: incompatible q/k/v shapes");
  check_arg(heads >= 1 && d % heads == 0, "attention: head count must divide model width");
  const int dh = d / heads;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(dh));

  auto probs = std::make_shared<Tensor>(Shape{s, heads, tq, tk});
  Tensor out(Shape{s, tq, d});
  const std::int64_t q_seq = static_cast<std::int64_t>(tq) * d;
  const std::int64_t k_seq = static_cast<std::int64_t>(tk) * d;
  const std::int64_t p_block = static_cast<std::int64_t>(tq) * tk;
  RowMatrix scores(tq, tk);
  for (int i = 0; i < s; ++i)
    for (int h = 0; h < heads; ++h) {
      StridedMap Q(q->value.data() + i * q_seq + h * dh, tq, dh, Eigen::OuterStride<>(d));
      StridedMap K(k->value.data() + i * k_seq + h * dh, tk, dh, Eigen::OuterStride<>(d));
      StridedMap V(v->value.data() + i * k_seq + h * dh, tk, dh, Eigen::OuterStride<>(d));
      scores.noalias() = (Q * K.transpose()) * scale;
      softmax_rows(scores);
      MatrixMap P(probs->data() + (static_cast<std::int64_t>(i) * heads + h) * p_block, tq, tk);
      P = scores;
      MutableStridedMap O(out.data() + i * q_seq + h * dh, tq, dh, Eigen::OuterStride<>(d));
      O.noalias() = P * V;
    }
  if (probe) probe->probs = *probs;

  return make_op(std::move(out), {q, k, v}, [probs, s, heads, tq, tk, d, dh, scale, q_seq, k_seq, p_block](Node& self) {
    Tensor* gq = input_grad(self, 0);
    Tensor* gk = input_grad(self, 1);
    Tensor* gv = input_grad(self, 2);
    const Real* qd = self.inputs[0]->value.data();
    const Real* kd = self.inputs[1]->value.data();
    const Real* vd = self.inputs[2]->value.data();
    RowMatrix dp(tq, tk);
    for (int i = 0; i < s; ++i)
      for (int h = 0; h < heads; ++h) {
        ConstMatrixMap P(probs->data() + (static_cast<std::int64_t>(i) * heads + h) * p_block, tq, tk);
        StridedMap GO(self.grad.data() + i * q_seq + h * dh, tq, dh, Eigen::OuterStride<>(d));
        StridedMap V(vd + i * k_seq + h * dh, tk, dh, Eigen::OuterStride<>(d));
        if (gv) {
          MutableStridedMap GV(gv->data() + i * k_seq + h * dh, tk, dh, Eigen::OuterStride<>(d));
          GV.noalias() += P.transpose() * GO;
        }
        if (!gq && !gk) continue;
        dp.noalias() = GO * V.transpose();
        // softmax backward: dS = P * (dP - rowsum(dP * P))
        for (int r = 0; r < tq; ++r) {
          const Real dot = dp.row(r).dot(P.row(r));
          dp.row(r) = (P.row(r).array() * (dp.row(r).array() - dot)).matrix() * scale;
        }
        if (gq) {
          StridedMap K(kd + i * k_seq + h * dh, tk, dh, Eigen::OuterStride<>(d));
          MutableStridedMap GQ(gq->data() + i * q_seq + h * dh, tq, dh, Eigen::OuterStride<>(d));
          GQ.noalias() += dp * K;
        }
        if (gk) {
          StridedMap Q(qd + i * q_seq + h * dh, tq, dh, Eigen::OuterStride<>(d));
          MutableStridedMap GK(gk->data() + i * k_seq + h * dh, tk, dh, Eigen::OuterStride<>(d));
          GK.noalias() += dp.transpose() * Q;
        }
      }
  });
}

}  // namespace ops

DPTC_END_NAMESPACE
