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

#include "motion/motion_modulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"

DPTC_BEGIN_NAMESPACE

namespace {

double squared_distance(const Real* a, const Real* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const double diff = static_cast<double>(a[i]) - b[i];
    s += diff * diff;
  }
  return s;
}

// Index of the nearest row of `table` [n, d], lowest index on ties.
int nearest_row(const Real* query, const Tensor& table, int d, double* dist = nullptr) {
  const int n = table.dim(0);
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double dd = squared_distance(query, table.data() + static_cast<std::int64_t>(i) * d, d);
    if (dd < best_d) {
      best_d = dd;
      best = i;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

void require_same_layout(const FeatureGrid& z, const FrameStats& s, const char* what) {
  if (s.mu.rank() != 3 || s.frames() != z.frames() || s.height() != z.height() || s.width() != z.width() ||
      !s.sigma2.same_shape(s.mu))
    fail(ErrorCode::kInvalidArgument, std::string(what) + ": statistics do not match the feature grid");
}

}  // namespace

std::string to_string(ModulationVariant variant) {
  return variant == ModulationVariant::kAsPrinted ? "as_printed" : "adain_corrected";
}

ModulationVariant parse_modulation_variant(const std::string& text) {
  if (text == "adain_corrected") return ModulationVariant::kAdainCorrected;
  if (text == "as_printed") return ModulationVariant::kAsPrinted;
  fail(ErrorCode::kConfig, "unknown modulation variant '" + text + "'");
}

FrameStats frame_channel_stats(const FeatureGrid& z) {
  check_arg(z.values.rank() == 4 && z.channels() >= 1, "frame_channel_stats: expected f x c x h x w features");
  const int f = z.frames(), c = z.channels(), hw = z.height() * z.width();
  FrameStats s{Tensor(Shape{f, z.height(), z.width()}), Tensor(Shape{f, z.height(), z.width()})};
  for (int t = 0; t < f; ++t)
    for (int p = 0; p < hw; ++p) {
      const Real* base = z.values.data() + static_cast<std::int64_t>(t) * c * hw + p;
      double mean = 0.0;
      for (int k = 0; k < c; ++k) mean += base[static_cast<std::int64_t>(k) * hw];
      mean /= c;
      double var = 0.0;
      for (int k = 0; k < c; ++k) {
        const double d = base[static_cast<std::int64_t>(k) * hw] - mean;
        var += d * d;
      }
      s.mu[static_cast<std::int64_t>(t) * hw + p] = static_cast<Real>(mean);
      s.sigma2[static_cast<std::int64_t>(t) * hw + p] = static_cast<Real>(var / c);
    }
  return s;
}

Tensor stats_vectors(const FrameStats& stats) {
  const int f = stats.frames(), hw = stats.height() * stats.width();
  Tensor out(Shape{hw, 2 * f});
  for (int p = 0; p < hw; ++p)
    for (int t = 0; t < f; ++t) {
      out[static_cast<std::int64_t>(p) * 2 * f + t] = stats.mu[static_cast<std::int64_t>(t) * hw + p];
      out[static_cast<std::int64_t>(p) * 2 * f + f + t] = stats.sigma2[static_cast<std::int64_t>(t) * hw + p];
    }
  return out;
}

Tensor kmeans(const Tensor& samples, int k, std::uint64_t seed, int iterations) {
  check_arg(samples.rank() == 2, "kmeans: samples must be [S, D]");
  const int n = samples.dim(0), d = samples.dim(1);
  if (k < 1) fail(ErrorCode::kConfig, "motion bank size must be at least 1");
  if (n < k)
    fail(ErrorCode::kInvalidArgument, "insufficient samples for motion bank: " + std::to_string(n) +
                                          " statistics vectors for " + std::to_string(k) + " entries");
  Rng rng(seed);
  auto sample = [&](int i) { return samples.data() + static_cast<std::int64_t>(i) * d; };
  Tensor centroids(Shape{k, d});
  auto set_centroid = [&](int j, const Real* src) {
    std::copy_n(src, d, centroids.data() + static_cast<std::int64_t>(j) * d);
  };

  // k-means++ seeding.
  std::vector<double> nearest(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
  set_centroid(0, sample(static_cast<int>(rng.below(static_cast<std::uint64_t>(n)))));
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    const Real* last = centroids.data() + static_cast<std::int64_t>(j - 1) * d;
    for (int i = 0; i < n; ++i) {
      nearest[static_cast<size_t>(i)] = std::min(nearest[static_cast<size_t>(i)], squared_distance(sample(i), last, d));
      total += nearest[static_cast<size_t>(i)];
    }
    int pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    if (total > 0.0) {
      double r = rng.uniform() * total;
      for (int i = 0; i < n; ++i) {
        r -= nearest[static_cast<size_t>(i)];
        if (r < 0.0 && nearest[static_cast<size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
      if (r >= 0.0)
        pick = static_cast<int>(std::max_element(nearest.begin(), nearest.end()) - nearest.begin());
    }
    set_centroid(j, sample(pick));
  }

  std::vector<int> assign(static_cast<size_t>(n), -1);
  std::vector<double> dist(static_cast<size_t>(n));
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int a = nearest_row(sample(i), centroids, d, &dist[static_cast<size_t>(i)]);
      if (a != assign[static_cast<size_t>(i)]) changed = true;
      assign[static_cast<size_t>(i)] = a;
    }
    std::vector<double> sum(static_cast<size_t>(k) * d, 0.0);
    std::vector<int> count(static_cast<size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      const int a = assign[static_cast<size_t>(i)];
      ++count[static_cast<size_t>(a)];
      for (int c = 0; c < d; ++c) sum[static_cast<size_t>(a) * d + c] += sample(i)[c];
    }
    bool reseeded = false;
    for (int j = 0; j < k; ++j) {
      if (count[static_cast<size_t>(j)] > 0) {
        for (int c = 0; c < d; ++c)
          centroids[static_cast<std::int64_t>(j) * d + c] =
              static_cast<Real>(sum[static_cast<size_t>(j) * d + c] / count[static_cast<size_t>(j)]);
        continue;
      }
      const int far = static_cast<int>(std::max_element(dist.begin(), dist.end()) - dist.begin());
      set_centroid(j, sample(far));
      dist[static_cast<size_t>(far)] = 0.0;
      reseeded = true;
    }
    if (!changed && !reseeded && it > 0) break;
  }
  return centroids;
}

double quantization_sse(const Tensor& samples, const Tensor& centroids) {
  const int n = samples.dim(0), d = samples.dim(1);
  check_arg(centroids.dim(1) == d, "quantization_sse: dimension mismatch");
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double dd = 0.0;
    nearest_row(samples.data() + static_cast<std::int64_t>(i) * d, centroids, d, &dd);
    total += dd;
  }
  return total;
}

MotionStatsBank build_motion_bank(const std::vector<FeatureGrid>& hq_features, int bank_size, std::uint64_t seed,
                                  int iterations) {
  check_arg(!hq_features.empty(), "build_motion_bank: no source clips");
  const int f = hq_features.front().frames();
  std::vector<Tensor> parts;
  int rows = 0;
  for (const auto& grid : hq_features) {
    if (grid.frames() != f) fail(ErrorCode::kInvalidArgument, "build_motion_bank: clips differ in frame count");
    parts.push_back(stats_vectors(frame_channel_stats(grid)));
    rows += parts.back().dim(0);
  }
  Tensor samples(Shape{rows, 2 * f});
  std::int64_t offset = 0;
  for (const auto& p : parts) {
    std::copy_n(p.data(), p.numel(), samples.data() + offset);
    offset += p.numel();
  }
  MotionStatsBank bank{kmeans(samples, bank_size, seed, iterations), f};
  for (int i = 0; i < bank.size(); ++i)
    for (int t = f; t < 2 * f; ++t) {
      Real& v = bank.entries[static_cast<std::int64_t>(i) * 2 * f + t];
      v = std::max(v, Real(0));
    }
  return bank;
}

std::vector<int> match_indices(const FrameStats& stats, const MotionStatsBank& bank) {
  if (bank.entries.rank() != 2 || bank.size() < 1) fail(ErrorCode::kInvalidArgument, "match_stats: empty motion bank");
  if (bank.frames != stats.frames())
    fail(ErrorCode::kInvalidArgument, "match_stats: bank built for " + std::to_string(bank.frames) +
                                          " frames, statistics have " + std::to_string(stats.frames()));
  const Tensor queries = stats_vectors(stats);
  const int d = 2 * bank.frames;
  std::vector<int> out(static_cast<size_t>(queries.dim(0)));
  for (int p = 0; p < queries.dim(0); ++p)
    out[static_cast<size_t>(p)] = nearest_row(queries.data() + static_cast<std::int64_t>(p) * d, bank.entries, d);
  return out;
}

FrameStats match_stats(const FrameStats& stats, const MotionStatsBank& bank) {
  const auto idx = match_indices(stats, bank);
  const int f = stats.frames(), hw = stats.height() * stats.width();
  FrameStats out{Tensor(stats.mu.shape()), Tensor(stats.mu.shape())};
  for (int p = 0; p < hw; ++p) {
    const Real* e = bank.row(idx[static_cast<size_t>(p)]);
    for (int t = 0; t < f; ++t) {
      out.mu[static_cast<std::int64_t>(t) * hw + p] = e[t];
      out.sigma2[static_cast<std::int64_t>(t) * hw + p] = e[f + t];
    }
  }
  return out;
}

FeatureGrid modulate(const FeatureGrid& z, const FrameStats& stats, const FrameStats& matched,
                     ModulationVariant variant, double eps) {
  check_arg(eps > 0, "modulate: epsilon must be positive");
  require_same_layout(z, stats, "modulate");
  require_same_layout(z, matched, "modulate");
  check_arg(z.values.all_finite() && stats.mu.all_finite() && stats.sigma2.all_finite() && matched.mu.all_finite() &&
                matched.sigma2.all_finite(),
            "modulate: non-finite input");
  const int f = z.frames(), c = z.channels(), hw = z.height() * z.width();
  Tensor out(z.values.shape());
  for (int t = 0; t < f; ++t)
    for (int p = 0; p < hw; ++p) {
      const std::int64_t s = static_cast<std::int64_t>(t) * hw + p;
      const double mu = stats.mu[s];
      const double sigma = std::sqrt(std::max(0.0, static_cast<double>(stats.sigma2[s])));
      const double mu_t = matched.mu[s];
      const double sigma_t = std::sqrt(std::max(0.0, static_cast<double>(matched.sigma2[s])));
      const double denom = (variant == ModulationVariant::kAsPrinted ? sigma_t : sigma) + eps;
      const double gain = sigma_t / denom;
      const std::int64_t base = static_cast<std::int64_t>(t) * c * hw + p;
      for (int k = 0; k < c; ++k) {
        const std::int64_t i = base + static_cast<std::int64_t>(k) * hw;
        out[i] = static_cast<Real>(gain * (z.values[i] - mu) + mu_t);
      }
    }
  return FeatureGrid(std::move(out), z.downscale);
}

void FusionConfig::validate() const {
  if (blocks < 0) fail(ErrorCode::kConfig, "fusion_blocks must be non-negative");
  if (heads < 1 || channels % heads != 0) fail(ErrorCode::kConfig, "fusion heads must divide latent channels");
  if (ffn_mult < 1) fail(ErrorCode::kConfig, "fusion ffn_mult must be at least 1");
}

FusionModule::FusionModule(FusionConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(derive_seed(cfg_.seed, 41));
  for (int i = 0; i < cfg_.blocks; ++i) blocks_.emplace_back(cfg_.channels, cfg_.heads, cfg_.ffn_mult, rng);
}

Var FusionModule::forward(const Var& content, const Var& modulated, int batch, ops::AttentionProbe* probe) const {
  const Shape& s = content->shape();
  if (s != modulated->shape()) fail(ErrorCode::kInvalidArgument, "fuse: geometry mismatch between z' and z''");
  check_arg(s.size() == 4 && s[0] % batch == 0 && s[1] == cfg_.channels, "fuse: expected [B*F, L, h, w] features");
  const int frames = s[0] / batch;
  const int tokens = frames * s[2] * s[3];
  auto flatten = [&](const Var& g) { return ops::reshape(ops::permute(g, {0, 2, 3, 1}), Shape{batch, tokens, s[1]}); };
  Var x = flatten(content);
  const Var ctx = flatten(modulated);
  for (size_t i = 0; i < blocks_.size(); ++i) x = blocks_[i](x, ctx, i + 1 == blocks_.size() ? probe : nullptr);
  return ops::permute(ops::reshape(x, Shape{s[0], s[2], s[3], s[1]}), {0, 3, 1, 2});
}

ParamSet FusionModule::params() const {
  ParamSet p;
  for (size_t i = 0; i < blocks_.size(); ++i) blocks_[i].collect(p, "fusion" + std::to_string(i));
  return p;
}

FeatureGrid fuse(const FeatureGrid& content, const FeatureGrid& modulated, const FusionModule& fusion) {
  NoGradGuard no_grad;
  const Var out = fusion.forward(constant(content.values), constant(modulated.values), 1);
  return FeatureGrid(out->value, content.downscale);
}

void save_motion_bank(const MotionStatsBank& bank, const MotionBankInfo& info, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "motion bank I/O assumes a little-endian host");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) fail(ErrorCode::kIo, "cannot write motion bank " + path.string());
    const std::uint32_t header[3] = {static_cast<std::uint32_t>(bank.size()), static_cast<std::uint32_t>(bank.frames),
                                     kMotionBankFormatVersion};
    os.write(reinterpret_cast<const char*>(header), sizeof header);
    for (Real v : bank.entries.values()) {
      const float x = static_cast<float>(v);
      os.write(reinterpret_cast<const char*>(&x), sizeof x);
    }
    if (!os) fail(ErrorCode::kIo, "failed writing motion bank " + path.string());
  }
  std::filesystem::rename(tmp, path);
  const nlohmann::json sidecar = {
      {"source_clip_count", info.source_clip_count}, {"seed", info.seed}, {"kmeans_iters", info.kmeans_iters}};
  std::ofstream js(path.string() + ".json");
  js << sidecar.dump(2) << '\n';
  if (!js) fail(ErrorCode::kIo, "cannot write motion bank sidecar for " + path.string());
}

MotionStatsBank load_motion_bank(const std::filesystem::path& path, MotionBankInfo* info) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::kIo, "cannot open motion bank " + path.string());
  std::uint32_t header[3];
  is.read(reinterpret_cast<char*>(header), sizeof header);
  if (!is) fail(ErrorCode::kIo, "motion bank truncated: " + path.string());
  if (header[2] != kMotionBankFormatVersion)
    fail(ErrorCode::kIo, "unsupported motion bank format version " + std::to_string(header[2]));
  const int m = static_cast<int>(header[0]), f = static_cast<int>(header[1]);
  if (m < 1 || f < 1) fail(ErrorCode::kIo, "motion bank header is invalid");
  MotionStatsBank bank{Tensor(Shape{m, 2 * f}), f};
  for (Real& v : bank.entries.values()) {
    float x;
    is.read(reinterpret_cast<char*>(&x), sizeof x);
    v = x;
  }
  if (!is) fail(ErrorCode::kIo, "motion bank truncated: " + path.string());
  if (info) {
    std::ifstream js(path.string() + ".json");
    if (js) {
      const auto doc = nlohmann::json::parse(js, nullptr, false);
      if (!doc.is_discarded()) {
        info->source_clip_count = doc.value("source_clip_count", 0);
        info->seed = doc.value("seed", std::uint64_t{0});
        info->kmeans_iters = doc.value("kmeans_iters", 50);
      }
    }
  }
  return bank;
}

DPTC_END_NAMESPACE
