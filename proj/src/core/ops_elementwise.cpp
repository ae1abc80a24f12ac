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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/ops.hpp"
#include "core/ops_internal.hpp"

DPTC_BEGIN_NAMESPACE

namespace ops {

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  check_arg(a->value.same_shape(b->value), std::string(op) + ": shape mismatch " +
                                               shape_to_string(a->shape()) + " vs " +
                                               shape_to_string(b->shape()));
}

template <typename Forward, typename Derivative>
Var unary(const Var& a, Forward f, Derivative df) {
  Tensor out(a->shape());
  const Real* x = a->value.data();
  Real* y = out.data();
  const std::int64_t n = out.numel();
  for (std::int64_t i = 0; i < n; ++i) y[i] = f(x[i]);
  return make_op(std::move(out), {a}, [df](Node& self) {
    Tensor* ga = input_grad(self, 0);
    if (!ga) return;
    const Real* x = self.inputs[0]->value.data();
    const Real* y = self.value.data();
    const Real* gy = self.grad.data();
    Real* gx = ga->data();
    const std::int64_t n = self.value.numel();
    for (std::int64_t i = 0; i < n; ++i) gx[i] += gy[i] * df(x[i], y[i]);
  });
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tensor out = a->value;
  const Real* pb = b->value.data();
  Real* po = out.data();
  for (std::int64_t i = 0; i < out.numel(); ++i) po[i] += pb[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    for (int k = 0; k < 2; ++k) {
      if (Tensor* g = input_grad(self, k)) accumulate(*g, self.grad);
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tensor out = a->value;
  const Real* pb = b->value.data();
  Real* po = out.data();
  for (std::int64_t i = 0; i < out.numel(); ++i) po[i] -= pb[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    if (Tensor* g = input_grad(self, 0)) accumulate(*g, self.grad);
    if (Tensor* g = input_grad(self, 1)) accumulate(*g, self.grad, Real(-1));
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a->value;
  const Real* pb = b->value.data();
  Real* po = out.data();
  for (std::int64_t i = 0; i < out.numel(); ++i) po[i] *= pb[i];
  return make_op(std::move(out), {a, b}, [](Node& self) {
    const std::int64_t n = self.value.numel();
    const Real* gy = self.grad.data();
    if (Tensor* g = input_grad(self, 0)) {
      const Real* pb = self.inputs[1]->value.data();
      for (std::int64_t i = 0; i < n; ++i) (*g)[i] += gy[i] * pb[i];
    }
    if (Tensor* g = input_grad(self, 1)) {
      const Real* pa = self.inputs[0]->value.data();
      for (std::int64_t i = 0; i < n; ++i) (*g)[i] += gy[i] * pa[i];
    }
  });
}

Var scale(const Var& a, Real s) {
  return unary(a, [s](Real x) { return s * x; }, [s](Real, Real) { return s; });
}

Var add_scalar(const Var& a, Real s) {
  return unary(a, [s](Real x) { return x + s; }, [](Real, Real) { return Real(1); });
}

Var silu(const Var& a) {
  return unary(
      a, [](Real x) { return x / (Real(1) + std::exp(-x)); },
      [](Real x, Real) {
        const Real s = Real(1) / (Real(1) + std::exp(-x));
        return s * (Real(1) + x * (Real(1) - s));
      });
}

Var gelu(const Var& a) {
  // tanh approximation
  constexpr Real c = Real(0.7978845608028654);  // sqrt(2/pi)
  constexpr Real k = Real(0.044715);
  return unary(
      a, [](Real x) { return Real(0.5) * x * (Real(1) + std::tanh(c * (x + k * x * x * x))); },
      [](Real x, Real) {
        const Real u = c * (x + k * x * x * x);
        const Real t = std::tanh(u);
        const Real du = c * (Real(1) + Real(3) * k * x * x);
        return Real(0.5) * (Real(1) + t) + Real(0.5) * x * (Real(1) - t * t) * du;
      });
}

Var sigmoid(const Var& a) {
  return unary(
      a, [](Real x) { return Real(1) / (Real(1) + std::exp(-x)); },
      [](Real, Real y) { return y * (Real(1) - y); });
}

Var clamp(const Var& a, Real lo, Real hi) {
  return unary(
      a, [lo, hi](Real x) { return std::clamp(x, lo, hi); },
      [lo, hi](Real x, Real) { return (x >= lo && x <= hi) ? Real(1) : Real(0); });
}

Var log_clamped(const Var& a, Real lo, Real hi) {
  return unary(
      a, [lo, hi](Real x) { return std::log(std::clamp(x, lo, hi)); },
      [lo, hi](Real x, Real) { return (x >= lo && x <= hi) ? Real(1) / x : Real(0); });
}

Var reshape(const Var& a, Shape shape) {
  Tensor out = a->value.reshaped(std::move(shape));
  return make_op(std::move(out), {a}, [](Node& self) {
    if (Tensor* g = input_grad(self, 0)) accumulate(*g, self.grad);
  });
}

Var permute(const Var& a, const std::vector<int>& order) {
  const Shape& in_shape = a->shape();
  const int r = static_cast<int>(in_shape.size());
  check_arg(static_cast<int>(order.size()) == r, "permute: order rank mismatch");
  std::vector<int> seen(static_cast<size_t>(r), 0);
  for (int o : order) {
    check_arg(o >= 0 && o < r && !seen[static_cast<size_t>(o)], "permute: invalid order");
    seen[static_cast<size_t>(o)] = 1;
  }
  Shape out_shape(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) out_shape[static_cast<size_t>(i)] = in_shape[static_cast<size_t>(order[static_cast<size_t>(i)])];

  // Input strides, reordered to follow output axes.
  std::vector<std::int64_t> in_stride(static_cast<size_t>(r), 1);
  for (int i = r - 2; i >= 0; --i)
    in_stride[static_cast<size_t>(i)] = in_stride[static_cast<size_t>(i + 1)] * in_shape[static_cast<size_t>(i + 1)];
  std::vector<std::int64_t> src_stride(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) src_stride[static_cast<size_t>(i)] = in_stride[static_cast<size_t>(order[static_cast<size_t>(i)])];

  // Flat index map output -> input, shared by forward and backward.
  auto index = std::make_shared<std::vector<std::int64_t>>(static_cast<size_t>(shape_numel(out_shape)));
  {
    std::vector<int> counter(static_cast<size_t>(r), 0);
    std::int64_t src = 0;
    for (auto& dst : *index) {
      dst = src;
      for (int axis = r - 1; axis >= 0; --axis) {
        auto ax = static_cast<size_t>(axis);
        if (++counter[ax] < out_shape[ax]) {
          src += src_stride[ax];
          break;
        }
        src -= src_stride[ax] * (out_shape[ax] - 1);
        counter[ax] = 0;
      }
    }
  }
  Tensor out(out_shape);
  const Real* x = a->value.data();
  for (size_t i = 0; i < index->size(); ++i) out[static_cast<std::int64_t>(i)] = x[(*index)[i]];
  return make_op(std::move(out), {a}, [index](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    const Real* gy = self.grad.data();
    Real* gx = g->data();
    for (size_t i = 0; i < index->size(); ++i) gx[(*index)[i]] += gy[i];
  });
}

Var detach(const Var& a) { return constant(a->value); }

Var straight_through(const Var& source, const Var& quantized) {
  require_same_shape(source, quantized, "straight_through");
  return make_op(quantized->value, {source}, [](Node& self) {
    if (Tensor* g = input_grad(self, 0)) accumulate(*g, self.grad);
  });
}

Var gather_rows(const Var& table, const std::vector<int>& rows) {
  check_arg(table->value.rank() == 2, "gather_rows: table must be rank 2");
  const int n = table->value.dim(0);
  const int d = table->value.dim(1);
  Tensor out(Shape{static_cast<int>(rows.size()), d});
  for (size_t i = 0; i < rows.size(); ++i) {
    check_arg(rows[i] >= 0 && rows[i] < n, "gather_rows: row index out of range");
    std::copy_n(table->value.data() + static_cast<std::int64_t>(rows[i]) * d, d,
                out.data() + static_cast<std::int64_t>(i) * d);
  }
  return make_op(std::move(out), {table}, [rows, d](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    for (size_t i = 0; i < rows.size(); ++i) {
      Real* dst = g->data() + static_cast<std::int64_t>(rows[i]) * d;
      const Real* src = self.grad.data() + static_cast<std::int64_t>(i) * d;
      for (int j = 0; j < d; ++j) dst[j] += src[j];
    }
  });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (Real v : a->value.values()) s += v;
  return make_op(Tensor::scalar(static_cast<Real>(s)), {a}, [](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    const Real gy = self.grad[0];
    for (Real& v : g->values()) v += gy;
  });
}

Var mean(const Var& a) {
  const auto n = static_cast<double>(a->value.numel());
  return scale(sum(a), static_cast<Real>(1.0 / n));
}

Var mean_per_sample(const Var& a) {
  check_arg(a->value.rank() >= 1, "mean_per_sample: rank must be >= 1");
  const int b = a->value.dim(0);
  const std::int64_t per = a->value.numel() / std::max(b, 1);
  Tensor out(Shape{b});
  for (int i = 0; i < b; ++i) {
    double s = 0.0;
    const Real* p = a->value.data() + i * per;
    for (std::int64_t j = 0; j < per; ++j) s += p[j];
    out[i] = static_cast<Real>(s / static_cast<double>(per));
  }
  return make_op(std::move(out), {a}, [b, per](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    for (int i = 0; i < b; ++i) {
      const Real gy = self.grad[i] / static_cast<Real>(per);
      Real* p = g->data() + i * per;
      for (std::int64_t j = 0; j < per; ++j) p[j] += gy;
    }
  });
}

Var l1_loss(const Var& a, const Var& b) {
  require_same_shape(a, b, "l1_loss");
  const std::int64_t n = a->value.numel();
  const Real* pa = a->value.data();
  const Real* pb = b->value.data();
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i) s += std::abs(static_cast<double>(pa[i]) - pb[i]);
  return make_op(Tensor::scalar(static_cast<Real>(s / static_cast<double>(n))), {a, b}, [n](Node& self) {
    const Real gy = self.grad[0] / static_cast<Real>(n);
    const Real* pa = self.inputs[0]->value.data();
    const Real* pb = self.inputs[1]->value.data();
    Tensor* ga = input_grad(self, 0);
    Tensor* gb = input_grad(self, 1);
    for (std::int64_t i = 0; i < n; ++i) {
      const Real d = pa[i] - pb[i];
      const Real sgn = d > 0 ? gy : (d < 0 ? -gy : Real(0));
      if (ga) (*ga)[i] += sgn;
      if (gb) (*gb)[i] -= sgn;
    }
  });
}

Var mse_loss(const Var& a, const Var& b) {
  require_same_shape(a, b, "mse_loss");
  const std::int64_t n = a->value.numel();
  const Real* pa = a->value.data();
  const Real* pb = b->value.data();
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(pa[i]) - pb[i];
    s += d * d;
  }
  return make_op(Tensor::scalar(static_cast<Real>(s / static_cast<double>(n))), {a, b}, [n](Node& self) {
    const Real gy = Real(2) * self.grad[0] / static_cast<Real>(n);
    const Real* pa = self.inputs[0]->value.data();
    const Real* pb = self.inputs[1]->value.data();
    Tensor* ga = input_grad(self, 0);
    Tensor* gb = input_grad(self, 1);
    for (std::int64_t i = 0; i < n; ++i) {
      const Real d = gy * (pa[i] - pb[i]);
      if (ga) (*ga)[i] += d;
      if (gb) (*gb)[i] -= d;
    }
  });
}

Var cross_entropy(const Var& logits, const std::vector<int>& targets) {
  const int classes = logits->value.dim(-1);
  const std::int64_t tokens = logits->value.numel() / classes;
  check_arg(static_cast<std::int64_t>(targets.size()) == tokens, "cross_entropy: target count mismatch");
  // Softmax probabilities are kept for the backward pass.
  auto probs = std::make_shared<Tensor>(Shape{static_cast<int>(tokens), classes});
  double total = 0.0;
  for (std::int64_t t = 0; t < tokens; ++t) {
    const int y = targets[static_cast<size_t>(t)];
    check_arg(y >= 0 && y < classes, "cross_entropy: target out of range");
    const Real* row = logits->value.data() + t * classes;
    Real* p = probs->data() + t * classes;
    const Real mx = *std::max_element(row, row + classes);
    double z = 0.0;
    for (int c = 0; c < classes; ++c) z += std::exp(static_cast<double>(row[c]) - mx);
    const double log_z = std::log(z) + mx;
    for (int c = 0; c < classes; ++c) p[c] = static_cast<Real>(std::exp(static_cast<double>(row[c]) - log_z));
    total += log_z - row[y];
  }
  Tensor out = Tensor::scalar(static_cast<Real>(total / static_cast<double>(tokens)));
  return make_op(std::move(out), {logits}, [probs, targets, classes, tokens](Node& self) {
    Tensor* g = input_grad(self, 0);
    if (!g) return;
    const Real gy = self.grad[0] / static_cast<Real>(tokens);
    for (std::int64_t t = 0; t < tokens; ++t) {
      const Real* p = probs->data() + t * classes;
      Real* gr = g->data() + t * classes;
      for (int c = 0; c < classes; ++c) gr[c] += gy * p[c];
      gr[targets[static_cast<size_t>(t)]] -= gy;
    }
  });
}

}  // namespace ops

DPTC_END_NAMESPACE
