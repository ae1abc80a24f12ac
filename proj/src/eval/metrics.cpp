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

#include "eval/metrics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

DPTC_BEGIN_NAMESPACE

namespace {

void require_same(const VideoClip& a, const VideoClip& b, const char* what) {
  if (!same_geometry(a, b))
    fail(ErrorCode::kInvalidArgument, std::string(what) + ": clips differ in geometry (" +
                                          shape_to_string(a.frames.shape()) + " vs " +
                                          shape_to_string(b.frames.shape()) + ")");
}

double mse_range(const Real* a, const Real* b, std::int64_t n) {
  double s = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return s / static_cast<double>(n);
}

double psnr_from_mse(double mse) {
  return mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / mse);
}

// Per frame, per layer RMS feature difference; result [frames][layers].
std::vector<std::vector<double>> layer_rms(const VideoClip& a, const VideoClip& b, const FeatureExtractor& phi) {
  require_same(a, b, "perceptual_distance");
  NoGradGuard no_grad;
  const auto fa = phi.extract(constant(to_rgb(a).frames));
  const auto fb = phi.extract(constant(to_rgb(b).frames));
  const int frames = a.frame_count();
  std::vector<std::vector<double>> out(static_cast<size_t>(frames));
  for (size_t l = 0; l < fa.size(); ++l) {
    const std::int64_t per_frame = fa[l]->value.numel() / frames;
    for (int f = 0; f < frames; ++f)
      out[static_cast<size_t>(f)].push_back(std::sqrt(mse_range(fa[l]->value.data() + f * per_frame,
                                                                fb[l]->value.data() + f * per_frame, per_frame)));
  }
  return out;
}

}  // namespace

double psnr(const VideoClip& a, const VideoClip& b) {
  require_same(a, b, "psnr");
  return psnr_from_mse(mse_range(a.frames.data(), b.frames.data(), a.frames.numel()));
}

std::vector<double> psnr_per_frame(const VideoClip& a, const VideoClip& b) {
  require_same(a, b, "psnr");
  const std::int64_t n = a.frame_size();
  std::vector<double> out;
  for (int f = 0; f < a.frame_count(); ++f)
    out.push_back(psnr_from_mse(mse_range(a.frames.data() + f * n, b.frames.data() + f * n, n)));
  return out;
}

double ifd(const VideoClip& clip) {
  if (clip.frames.rank() != 4 || clip.frame_count() < 2)
    fail(ErrorCode::kInvalidArgument, "ifd needs at least two frames");
  const std::int64_t n = clip.frame_size();
  double total = 0.0;
  for (int f = 0; f + 1 < clip.frame_count(); ++f)
    total += mse_range(clip.frames.data() + f * n, clip.frames.data() + (f + 1) * n, n);
  return 255.0 * 255.0 * total / (clip.frame_count() - 1);
}

double perceptual_distance(const VideoClip& a, const VideoClip& b, const FeatureExtractor& phi) {
  const auto per_frame = perceptual_per_frame(a, b, phi);
  double s = 0.0;
  for (double v : per_frame) s += v;
  return s / static_cast<double>(per_frame.size());
}

std::vector<double> perceptual_per_frame(const VideoClip& a, const VideoClip& b, const FeatureExtractor& phi) {
  const auto rms = layer_rms(a, b, phi);
  std::vector<double> out;
  for (const auto& layers : rms) {
    double s = 0.0;
    for (double v : layers) s += v;
    out.push_back(s / static_cast<double>(layers.size()));
  }
  return out;
}

double frechet_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) fail(ErrorCode::kInvalidArgument, "frechet_distance: feature dimensions differ");
  if (a.rows() < 2 || b.rows() < 2) fail(ErrorCode::kInvalidArgument, "frechet_distance: need at least two samples per set");
  const Eigen::RowVectorXd mu_a = a.colwise().mean();
  const Eigen::RowVectorXd mu_b = b.colwise().mean();
  const Eigen::MatrixXd ca = a.rowwise() - mu_a;
  const Eigen::MatrixXd cb = b.rowwise() - mu_b;
  const Eigen::MatrixXd sa = (ca.transpose() * ca) / static_cast<double>(a.rows() - 1);
  const Eigen::MatrixXd sb = (cb.transpose() * cb) / static_cast<double>(b.rows() - 1);

  // Tr((Sa Sb)^1/2) = Tr((Sa^1/2 Sb Sa^1/2)^1/2), the inner product being symmetric PSD.
  auto psd_sqrt = [](const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return Eigen::MatrixXd(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
  };
  const Eigen::MatrixXd root_a = psd_sqrt(sa);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (root_a * sb * root_a + (root_a * sb * root_a).transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double tr_cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double value = (mu_a - mu_b).squaredNorm() + sa.trace() + sb.trace() - 2.0 * tr_cross;
  return std::max(0.0, value);
}

Eigen::MatrixXd pooled_features(const VideoClip& clip, const FeatureExtractor& phi) {
  NoGradGuard no_grad;
  const auto feats = phi.extract(constant(to_rgb(clip).frames));
  const Tensor& last = feats.back()->value;
  const int frames = last.dim(0), c = last.dim(1);
  const std::int64_t plane = last.numel() / (static_cast<std::int64_t>(frames) * c);
  Eigen::MatrixXd out(frames, c);
  for (int f = 0; f < frames; ++f)
    for (int k = 0; k < c; ++k) {
      double s = 0.0;
      const Real* p = last.data() + (static_cast<std::int64_t>(f) * c + k) * plane;
      for (std::int64_t i = 0; i < plane; ++i) s += p[i];
      out(f, k) = s / static_cast<double>(plane);
    }
  return out;
}

DPTC_END_NAMESPACE
