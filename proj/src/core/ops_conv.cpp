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

#include "core/ops.hpp"
#include "core/ops_internal.hpp"

DPTC_BEGIN_NAMESPACE

namespace ops {

namespace {

struct Geometry {
  int channels, height, width;  // image side
  int kernel_h, kernel_w, stride, pad_h, pad_w;
  int out_h, out_w;             // column side
};

// cols[(c*kh + ky)*kw + kx][oy*out_w + ox] = img[c][oy*s - ph + ky][ox*s - pw + kx]
void im2col(const Real* img, const Geometry& g, Real* cols) {
  const int plane = g.out_h * g.out_w;
  for (int c = 0; c < g.channels; ++c)
    for (int ky = 0; ky < g.kernel_h; ++ky)
      for (int kx = 0; kx < g.kernel_w; ++kx) {
        Real* dst = cols + ((static_cast<std::int64_t>(c) * g.kernel_h + ky) * g.kernel_w + kx) * plane;
        const Real* src = img + static_cast<std::int64_t>(c) * g.height * g.width;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.pad_h + ky;
          Real* row = dst + static_cast<std::int64_t>(oy) * g.out_w;
          if (iy < 0 || iy >= g.height) {
            std::fill(row, row + g.out_w, Real(0));
            continue;
          }
          const Real* srow = src + static_cast<std::int64_t>(iy) * g.width;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride - g.pad_w + kx;
            row[ox] = (ix >= 0 && ix < g.width) ? srow[ix] : Real(0);
          }
        }
      }
}

// Adjoint of im2col: accumulates columns back into the image.
void col2im(const Real* cols, const Geometry& g, Real* img) {
  const int plane = g.out_h * g.out_w;
  for (int c = 0; c < g.channels; ++c)
    for (int ky = 0; ky < g.kernel_h; ++ky)
      for (int kx = 0; kx < g.kernel_w; ++kx) {
        const Real* src = cols + ((static_cast<std::int64_t>(c) * g.kernel_h + ky) * g.kernel_w + kx) * plane;
        Real* dst = img + static_cast<std::int64_t>(c) * g.height * g.width;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.pad_h + ky;
          if (iy < 0 || iy >= g.height) continue;
          const Real* row = src + static_cast<std::int64_t>(oy) * g.out_w;
          Real* drow = dst + static_cast<std::int64_t>(iy) * g.width;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride - g.pad_w + kx;
            if (ix >= 0 && ix < g.width) drow[ix] += row[ox];
          }
        }
      }
}

void add_bias(Real* y, const Real* bias, int channels, int plane) {
  for (int c = 0; c < channels; ++c) {
    Real* p = y + static_cast<std::int64_t>(c) * plane;
    for (int i = 0; i < plane; ++i) p[i] += bias[c];
  }
}

void accumulate_bias_grad(const Real* gy, Real* gb, int channels, int plane) {
  for (int c = 0; c < channels; ++c) {
    const Real* p = gy + static_cast<std::int64_t>(c) * plane;
    double s = 0.0;
    for (int i = 0; i < plane; ++i) s += p[i];
    gb[c] += static_cast<Real>(s);
  }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  check_arg(x->value.rank() == 4 && w->value.rank() == 4, "conv2d: expected rank-4 input and weight");
  const int n = x->value.dim(0);
  const int out_c = w->value.dim(0);
  const int k = w->value.dim(2);
  Geometry g{x->value.dim(1), x->value.dim(2), x->value.dim(3), k, w->value.dim(3), stride, pad, pad, 0, 0};
  check_arg(w->value.dim(1) == g.channels,
            "conv2d: input " + shape_to_string(x->shape()) + " vs weight " + shape_to_string(w->shape()));
  g.out_h = (g.height + 2 * pad - g.kernel_h) / stride + 1;
  g.out_w = (g.width + 2 * pad - g.kernel_w) / stride + 1;
  check_arg(g.out_h > 0 && g.out_w > 0, "conv2d: output would be empty");
  if (b) check_arg(b->value.numel() == out_c, "conv2d: bias size mismatch");

  const int ck = g.channels * g.kernel_h * g.kernel_w;
  const int plane = g.out_h * g.out_w;
  const std::int64_t in_stride = static_cast<std::int64_t>(g.channels) * g.height * g.width;
  const std::int64_t out_stride = static_cast<std::int64_t>(out_c) * plane;
  Tensor out(Shape{n, out_c, g.out_h, g.out_w});
  {
    RowMatrix cols(ck, plane);
    ConstMatrixMap W(w->value.data(), out_c, ck);
    for (int i = 0; i < n; ++i) {
      im2col(x->value.data() + i * in_stride, g, cols.data());
      MatrixMap Y(out.data() + i * out_stride, out_c, plane);
      Y.noalias() = W * cols;
      if (b) add_bias(Y.data(), b->value.data(), out_c, plane);
    }
  }
  return make_op(std::move(out), {x, w, b}, [g, n, out_c, ck, plane, in_stride, out_stride](Node& self) {
    Tensor* gx = input_grad(self, 0);
    Tensor* gw = input_grad(self, 1);
    Tensor* gb = self.inputs[2] ? input_grad(self, 2) : nullptr;
    ConstMatrixMap W(self.inputs[1]->value.data(), out_c, ck);
    RowMatrix cols(ck, plane);
    for (int i = 0; i < n; ++i) {
      ConstMatrixMap GY(self.grad.data() + i * out_stride, out_c, plane);
      if (gw) {
        im2col(self.inputs[0]->value.data() + i * in_stride, g, cols.data());
        MatrixMap GW(gw->data(), out_c, ck);
        GW.noalias() += GY * cols.transpose();
      }
      if (gx) {
        cols.noalias() = W.transpose() * GY;
        col2im(cols.data(), g, gx->data() + i * in_stride);
      }
      if (gb) accumulate_bias_grad(GY.data(), gb->data(), out_c, plane);
    }
  });
}

Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  check_arg(x->value.rank() == 4 && w->value.rank() == 4, "conv_transpose2d: expected rank-4 tensors");
  const int n = x->value.dim(0);
  const int in_c = x->value.dim(1);
  const int in_h = x->value.dim(2);
  const int in_w = x->value.dim(3);
  check_arg(w->value.dim(0) == in_c, "conv_transpose2d: weight input channels mismatch");
  const int out_c = w->value.dim(1);
  const int k = w->value.dim(2);
  const int out_h = (in_h - 1) * stride - 2 * pad + k;
  const int out_w = (in_w - 1) * stride - 2 * pad + w->value.dim(3);
  check_arg(out_h > 0 && out_w > 0, "conv_transpose2d: output would be empty");
  if (b) check_arg(b->value.numel() == out_c, "conv_transpose2d: bias size mismatch");
  // Geometry of the equivalent forward convolution: output image -> input grid.
  const Geometry g{out_c, out_h, out_w, k, w->value.dim(3), stride, pad, pad, in_h, in_w};
  const int ck = out_c * g.kernel_h * g.kernel_w;
  const int in_plane = in_h * in_w;
  const int out_plane = out_h * out_w;
  const std::int64_t in_stride = static_cast<std::int64_t>(in_c) * in_plane;
  const std::int64_t out_stride = static_cast<std::int64_t>(out_c) * out_plane;

  Tensor out(Shape{n, out_c, out_h, out_w});
  {
    RowMatrix cols(ck, in_plane);
    ConstMatrixMap W(w->value.data(), in_c, ck);
    for (int i = 0; i < n; ++i) {
      ConstMatrixMap X(x->value.data() + i * in_stride, in_c, in_plane);
      cols.noalias() = W.transpose() * X;
      col2im(cols.data(), g, out.data() + i * out_stride);
      if (b) add_bias(out.data() + i * out_stride, b->value.data(), out_c, out_plane);
    }
  }
  return make_op(std::move(out), {x, w, b},
                 [g, n, in_c, ck, in_plane, out_c, out_plane, in_stride, out_stride](Node& self) {
                   Tensor* gx = input_grad(self, 0);
                   Tensor* gw = input_grad(self, 1);
                   Tensor* gb = self.inputs[2] ? input_grad(self, 2) : nullptr;
                   ConstMatrixMap W(self.inputs[1]->value.data(), in_c, ck);
                   RowMatrix cols(ck, in_plane);
                   for (int i = 0; i < n; ++i) {
                     const Real* gy = self.grad.data() + i * out_stride;
                     if (gx || gw) im2col(gy, g, cols.data());
                     if (gx) {
                       MatrixMap GX(gx->data() + i * in_stride, in_c, in_plane);
                       GX.noalias() += W * cols;
                     }
                     if (gw) {
                       ConstMatrixMap X(self.inputs[0]->value.data() + i * in_stride, in_c, in_plane);
                       MatrixMap GW(gw->data(), in_c, ck);
                       GW.noalias() += X * cols.transpose();
                     }
                     if (gb) accumulate_bias_grad(gy, gb->data(), out_c, out_plane);
                   }
                 });
}

namespace {

struct Geometry3d {
  int frames, channels, height, width;
  int kt, kh, kw;
};

// Columns for output frame t: rows (c, dt, ky, kx), columns (y, x); stride 1, same padding.
void im2col3d(const Real* clip, const Geometry3d& g, int t, Real* cols) {
  const int plane = g.height * g.width;
  const std::int64_t frame_stride = static_cast<std::int64_t>(g.channels) * plane;
  const Geometry g2{g.channels, g.height, g.width, g.kh, g.kw, 1, g.kh / 2, g.kw / 2, g.height, g.width};
  const std::int64_t rows_per_dt = static_cast<std::int64_t>(g.kh) * g.kw;
  for (int dt = 0; dt < g.kt; ++dt) {
    const int src_t = t + dt - g.kt / 2;
    for (int c = 0; c < g.channels; ++c) {
      Real* dst = cols + ((static_cast<std::int64_t>(c) * g.kt + dt) * rows_per_dt) * plane;
      if (src_t < 0 || src_t >= g.frames) {
        std::fill(dst, dst + rows_per_dt * plane, Real(0));
        continue;
      }
      Geometry single = g2;
      single.channels = 1;
      im2col(clip + src_t * frame_stride + static_cast<std::int64_t>(c) * plane, single, dst);
    }
  }
}

void col2im3d(const Real* cols, const Geometry3d& g, int t, Real* clip) {
  const int plane = g.height * g.width;
  const std::int64_t frame_stride = static_cast<std::int64_t>(g.channels) * plane;
  const Geometry g2{1, g.height, g.width, g.kh, g.kw, 1, g.kh / 2, g.kw / 2, g.height, g.width};
  const std::int64_t rows_per_dt = static_cast<std::int64_t>(g.kh) * g.kw;
  for (int dt = 0; dt < g.kt; ++dt) {
    const int src_t = t + dt - g.kt / 2;
    if (src_t < 0 || src_t >= g.frames) continue;
    for (int c = 0; c < g.channels; ++c) {
      const Real* src = cols + ((static_cast<std::int64_t>(c) * g.kt + dt) * rows_per_dt) * plane;
      col2im(src, g2, clip + src_t * frame_stride + static_cast<std::int64_t>(c) * plane);
    }
  }
}

}  // namespace

Var conv3d(const Var& x, const Var& w, const Var& b) {
  check_arg(x->value.rank() == 5 && w->value.rank() == 5, "conv3d: expected [B,F,C,H,W] input and 5-d weight");
  const int batch = x->value.dim(0);
  const Geometry3d g{x->value.dim(1), x->value.dim(2), x->value.dim(3), x->value.dim(4),
                     w->value.dim(2), w->value.dim(3), w->value.dim(4)};
  const int out_c = w->value.dim(0);
  check_arg(w->value.dim(1) == g.channels, "conv3d: channel mismatch");
  check_arg(g.kt % 2 == 1 && g.kh % 2 == 1 && g.kw % 2 == 1, "conv3d: kernel extents must be odd");
  if (b) check_arg(b->value.numel() == out_c, "conv3d: bias size mismatch");
  const int plane = g.height * g.width;
  const int ck = g.channels * g.kt * g.kh * g.kw;
  const std::int64_t in_clip = static_cast<std::int64_t>(g.frames) * g.channels * plane;
  const std::int64_t out_frame = static_cast<std::int64_t>(out_c) * plane;
  const std::int64_t out_clip = out_frame * g.frames;

  Tensor out(Shape{batch, g.frames, out_c, g.height, g.width});
  {
    RowMatrix cols(ck, plane);
    ConstMatrixMap W(w->value.data(), out_c, ck);
    for (int i = 0; i < batch; ++i)
      for (int t = 0; t < g.frames; ++t) {
        im2col3d(x->value.data() + i * in_clip, g, t, cols.data());
        MatrixMap Y(out.data() + i * out_clip + t * out_frame, out_c, plane);
        Y.noalias() = W * cols;
        if (b) add_bias(Y.data(), b->value.data(), out_c, plane);
      }
  }
  return make_op(std::move(out), {x, w, b}, [g, batch, out_c, ck, plane, in_clip, out_frame, out_clip](Node& self) {
    Tensor* gx = input_grad(self, 0);
    Tensor* gw = input_grad(self, 1);
    Tensor* gb = self.inputs[2] ? input_grad(self, 2) : nullptr;
    ConstMatrixMap W(self.inputs[1]->value.data(), out_c, ck);
    RowMatrix cols(ck, plane);
    for (int i = 0; i < batch; ++i)
      for (int t = 0; t < g.frames; ++t) {
        ConstMatrixMap GY(self.grad.data() + i * out_clip + t * out_frame, out_c, plane);
        if (gw) {
          im2col3d(self.inputs[0]->value.data() + i * in_clip, g, t, cols.data());
          MatrixMap GW(gw->data(), out_c, ck);
          GW.noalias() += GY * cols.transpose();
        }
        if (gx) {
          cols.noalias() = W.transpose() * GY;
          col2im3d(cols.data(), g, t, gx->data() + i * in_clip);
        }
        if (gb) accumulate_bias_grad(GY.data(), gb->data(), out_c, plane);
      }
  });
}

}  // namespace ops

DPTC_END_NAMESPACE
