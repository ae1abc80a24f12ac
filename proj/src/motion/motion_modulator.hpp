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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "codec/vq_codec.hpp"

DPTC_BEGIN_NAMESPACE

/// Channel mean and population variance per token, each [f, h, w].
struct FrameStats {
  Tensor mu;
  Tensor sigma2;

  int frames() const { return mu.dim(0); }
  int height() const { return mu.dim(1); }
  int width() const { return mu.dim(2); }
};

/// M cross-frame statistics vectors of length 2f: f means then f variances.
struct MotionStatsBank {
  Tensor entries;  // [M, 2f]
  int frames = 0;

  int size() const { return entries.dim(0); }
  const Real* row(int i) const { return entries.data() + static_cast<std::int64_t>(i) * 2 * frames; }
};

struct MotionBankInfo {
  int source_clip_count = 0;
  std::uint64_t seed = 0;
  int kmeans_iters = 50;
};

enum class ModulationVariant { kAdainCorrected, kAsPrinted };

std::string to_string(ModulationVariant variant);
ModulationVariant parse_modulation_variant(const std::string& text);

FrameStats frame_channel_stats(const FeatureGrid& z);

/// Rows [h*w, 2f] of Concat(mu[., y, x], sigma2[., y, x]) per location (y, x).
Tensor stats_vectors(const FrameStats& stats);

/// Lloyd iterations with k-means++ seeding; empty clusters are reseeded to the
/// sample farthest from its centroid. samples [S, D] -> centroids [k, D].
Tensor kmeans(const Tensor& samples, int k, std::uint64_t seed, int iterations = 50);
/// Sum of squared distances from each sample to its nearest centroid.
double quantization_sse(const Tensor& samples, const Tensor& centroids);

MotionStatsBank build_motion_bank(const std::vector<FeatureGrid>& hq_features, int bank_size, std::uint64_t seed,
                                  int iterations = 50);

/// Nearest bank entry per location, lowest index on ties; [h*w].
std::vector<int> match_indices(const FrameStats& stats, const MotionStatsBank& bank);
FrameStats match_stats(const FrameStats& stats, const MotionStatsBank& bank);

/// Renormalizes each token of z' from (mu, sigma) to (mu', sigma').
/// kAdainCorrected divides by sigma + eps; kAsPrinted divides by sigma' + eps.
FeatureGrid modulate(const FeatureGrid& z, const FrameStats& stats, const FrameStats& matched,
                     ModulationVariant variant, double eps = 1e-5);

struct FusionConfig {
  int blocks = 2;
  int heads = 4;
  int ffn_mult = 2;
  int channels = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Cross-attention blocks where z' queries z''. Output projections start at zero.
class FusionModule {
 public:
  explicit FusionModule(FusionConfig cfg);

  const FusionConfig& config() const noexcept { return cfg_; }
  /// content, modulated [B*F, L, h, w] -> fused [B*F, L, h, w].
  Var forward(const Var& content, const Var& modulated, int batch, ops::AttentionProbe* probe = nullptr) const;
  ParamSet params() const;

 private:
  FusionConfig cfg_;
  std::vector<nn::CrossAttentionBlock> blocks_;
};

FeatureGrid fuse(const FeatureGrid& content, const FeatureGrid& modulated, const FusionModule& fusion);

/// Header {M, f, format_version} as little-endian u32, then M*2f little-endian f32,
/// plus a JSON sidecar at `<path>.json`.
inline constexpr std::uint32_t kMotionBankFormatVersion = 1;
void save_motion_bank(const MotionStatsBank& bank, const MotionBankInfo& info, const std::filesystem::path& path);
MotionStatsBank load_motion_bank(const std::filesystem::path& path, MotionBankInfo* info = nullptr);

DPTC_END_NAMESPACE
