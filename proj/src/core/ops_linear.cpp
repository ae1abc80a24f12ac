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

Var linear(const Var& x, const Var& w, const Var& b) {
  check_arg(w->value.rank() == 2, "linear: weight must be [in, out]");
  const int in = w->value.dim(0);
  const int out_features = w->value.dim(1);
  check_arg(x->value.rank() >= 1 && x->value.dim(-1) == in,
            "linear: input " + shape_to_string(x->shape()) + " does not match weight " +
                shape_to_string(w->shape()));
  if (b) check_arg(b->value.numel() == out_features, "linear: bias size mismatch");
  const auto rows = static_cast<Eigen::Index>(x->value.numel() / in);

  Shape out_shape = x->shape();
  out_shape.back() = out_features;
  Tensor out(out_shape);
  ConstMatrixMap X(x->value.data(), rows, in);
  ConstMatrixMap W(w->value.data(), in, out_features);
  MatrixMap Y(out.data(), rows, out_features);
  Y.noalias() = X * W;
  if (b) {
    Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>> bias(b->value.data(), out_features);
    Y.rowwise() += bias;
  }
  return make_op(std::move(out), {x, w, b}, [rows, in, out_features](Node& self) {
    ConstMatrixMap GY(self.grad.data(), rows, out_features);
    if (Tensor* gx = input_grad(self, 0)) {
      ConstMatrixMap W(self.inputs[1]->value.data(), in, out_features);
      MatrixMap GX(gx->data(), rows, in);
      GX.noalias() += GY * W.transpose();
    }
    if (Tensor* gw = input_grad(self, 1)) {
      ConstMatrixMap X(self.inputs[0]->value.data(), rows, in);
      MatrixMap GW(gw->data(), in, out_features);
      GW.noalias() += X.transpose() * GY;
    }
    if (self.inputs[2]) {
      if (Tensor* gb = input_grad(self, 2)) {
        Eigen::Map<Eigen::Matrix<Real, 1, Eigen::Dynamic>> GB(gb->data(), out_features);
        GB += GY.colwise().sum();
      }
    }
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, Real eps) {
  const int d = x->value.dim(-1);
  check_arg(gamma->value.numel() == d && beta->value.numel() == d, "layer_norm: affine size mismatch");
  const std::int64_t rows = x->value.numel() / d;
  Tensor out(x->shape());
  // Normalized values and inverse std are reused by backward.
  auto xhat = std::make_shared<Tensor>(x->shape());
  auto inv_std = std::make_shared<std::vector<Real>>(static_cast<size_t>(rows));
  const Real* px = x->value.data();
  const Real* pg = gamma->value.data();
  const Real* pb = beta->value.data();
  for (std::int64_t r = 0; r < rows; ++r) {
    const Real* row = px + r * d;
    double m = 0.0;
    for (int i = 0; i < d; ++i) m += row[i];
    m /= d;
    double v = 0.0;
    for (int i = 0; i < d; ++i) v += (row[i] - m) * (row[i] - m);
    v /= d;
    const Real is = static_cast<Real>(1.0 / std::sqrt(v + eps));
    (*inv_std)[static_cast<size_t>(r)] = is;
    Real* xh = xhat->data() + r * d;
    Real* y = out.data() + r * d;
    for (int i = 0; i < d; ++i) {
      xh[i] = static_cast<Real>((row[i] - m) * is);
      y[i] = xh[i] * pg[i] + pb[i];
    }
  }
  return make_op(std::move(out), {x, gamma, beta}, [xhat, inv_std, d, rows](Node& self) {
    const Real* gy = self.grad.data();
    const Real* pg = self.inputs[1]->value.data();
    Tensor* gx = input_grad(self, 0);
    Tensor* gg = input_grad(self, 1);
    Tensor* gb = input_grad(self, 2);
    std::vector<Real> gxh(static_cast<size_t>(d));
    for (std::int64_t r = 0; r < rows; ++r) {
      const Real* xh = xhat->data() + r * d;
      const Real* g = gy + r * d;
      if (gg)
        for (int i = 0; i < d; ++i) (*gg)[i] += g[i] * xh[i];
      if (gb)
        for (int i = 0; i < d; ++i) (*gb)[i] += g[i];
      if (gx) {
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < d; ++i) {
          gxh[static_cast<size_t>(i)] = g[i] * pg[i];
          s1 += gxh[static_cast<size_t>(i)];
          s2 += gxh[static_cast<size_t>(i)] * xh[i];
        }
        const Real is = (*inv_std)[static_cast<size_t>(r)];
        Real* out = gx->data() + r * d;
        for (int i = 0; i < d; ++i) {
          out[i] += is * static_cast<Real>(gxh[static_cast<size_t>(i)] - s1 / d - xh[i] * s2 / d);
        }
      }
    }
  });
}

Var add_position(const Var& x, const Var& temporal, const Var& spatial) {
  check_arg(x->value.rank() == 3, "add_position: x must be [B, T, D]");
  const int b = x->value.dim(0);
  const int t = x->value.dim(1);
  const int d = x->value.dim(2);
  const int frames = temporal->value.dim(0);
  const int hw = spatial->value.dim(0);
  check_arg(temporal->value.dim(1) == d && spatial->value.dim(1) == d && frames * hw == t,
            "add_position: token geometry " + shape_to_string(x->shape()) + " does not match position tables");
  Tensor out = x->value;
  for (int i = 0; i < b; ++i)
    for (int f = 0; f < frames; ++f)
      for (int s = 0; s < hw; ++s) {
        Real* row = out.data() + (static_cast<std::int64_t>(i) * t + f * hw + s) * d;
        const Real* pt = temporal->value.data() + static_cast<std::int64_t>(f) * d;
        const Real* ps = spatial->value.data() + static_cast<std::int64_t>(s) * d;
        for (int c = 0; c < d; ++c) row[c] += pt[c] + ps[c];
      }
  return make_op(std::move(out), {x, temporal, spatial}, [b, t, d, frames, hw](Node& self) {
    if (Tensor* gx = input_grad(self, 0)) accumulate(*gx, self.grad);
    Tensor* gt = input_grad(self, 1);
    Tensor* gs = input_grad(self, 2);
    if (!gt && !gs) return;
    for (int i = 0; i < b; ++i)
      for (int f = 0; f < frames; ++f)
        for (int s = 0; s < hw; ++s) {
          const Real* g = self.grad.data() + (static_cast<std::int64_t>(i) * t + f * hw + s) * d;
          if (gt) {
            Real* dst = gt->data() + static_cast<std::int64_t>(f) * d;
            for (int c = 0; c < d; ++c) dst[c] += g[c];
          }
          if (gs) {
            Real* dst = gs->data() + static_cast<std::int64_t>(s) * d;
            for (int c = 0; c < d; ++c) dst[c] += g[c];
          }
        }
  });
}

}  // namespace ops

DPTC_END_NAMESPACE
