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

// Independent reference implementations used as test oracles. They favour
// plain loops over speed and share no code with the library kernels.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline double sqdist(const double* a, const double* b, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

/// Index of the nearest row of `bank` [n, d], lowest index on ties.
inline int nearest(const double* q, const Vec& bank, int n, int d) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double dist = sqdist(q, bank.data() + static_cast<size_t>(i) * d, d);
    if (dist < best_d) {
      best_d = dist;
      best = i;
    }
  }
  return best;
}

/// Direct cross-correlation, x [n, c, h, w], w [o, c, k, k], zero padding.
inline Vec conv2d(const Vec& x, int n, int c, int h, int w, const Vec& wt, const Vec& bias, int o, int k, int stride,
                  int pad, int* oh_out, int* ow_out) {
  const int oh = (h + 2 * pad - k) / stride + 1, ow = (w + 2 * pad - k) / stride + 1;
  Vec out(static_cast<size_t>(n) * o * oh * ow, 0.0);
  for (int b = 0; b < n; ++b)
    for (int oc = 0; oc < o; ++oc)
      for (int y = 0; y < oh; ++y)
        for (int xx = 0; xx < ow; ++xx) {
          double s = bias.empty() ? 0.0 : bias[oc];
          for (int ic = 0; ic < c; ++ic)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const int iy = y * stride - pad + ky, ix = xx * stride - pad + kx;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                s += x[((static_cast<size_t>(b) * c + ic) * h + iy) * w + ix] *
                     wt[((static_cast<size_t>(oc) * c + ic) * k + ky) * k + kx];
              }
          out[((static_cast<size_t>(b) * o + oc) * oh + y) * ow + xx] = s;
        }
  *oh_out = oh;
  *ow_out = ow;
  return out;
}

/// Single-head softmax attention for one sequence; q [tq, d], k, v [tk, d].
inline Vec attention(const Vec& q, const Vec& k, const Vec& v, int tq, int tk, int d, Vec* probs = nullptr) {
  Vec out(static_cast<size_t>(tq) * d, 0.0);
  if (probs) probs->assign(static_cast<size_t>(tq) * tk, 0.0);
  for (int i = 0; i < tq; ++i) {
    Vec s(tk);
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < tk; ++j) {
      double dot = 0;
      for (int e = 0; e < d; ++e) dot += q[static_cast<size_t>(i) * d + e] * k[static_cast<size_t>(j) * d + e];
      s[j] = dot / std::sqrt(static_cast<double>(d));
      mx = std::max(mx, s[j]);
    }
    double z = 0;
    for (double& x : s) z += (x = std::exp(x - mx));
    for (int j = 0; j < tk; ++j) {
      const double p = s[j] / z;
      if (probs) (*probs)[static_cast<size_t>(i) * tk + j] = p;
      for (int e = 0; e < d; ++e) out[static_cast<size_t>(i) * d + e] += p * v[static_cast<size_t>(j) * d + e];
    }
  }
  return out;
}

inline double cross_entropy(const Vec& logits, int n, int target) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) mx = std::max(mx, logits[i]);
  double z = 0;
  for (int i = 0; i < n; ++i) z += std::exp(logits[i] - mx);
  return -(logits[target] - mx - std::log(z));
}

}  // namespace oracle
