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
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "support/oracles.hpp"

#include "motion/motion_modulator.hpp"

using namespace dptc;

namespace {

FeatureGrid grid(int f, int c, int h, int w, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Tensor t({f, c, h, w});
  for (auto& v : t.values()) v = static_cast<Real>(scale * rng.normal());
  return FeatureGrid(std::move(t), 1);
}

}  // namespace

TEST_CASE("channel statistics of a two-channel token") {
  FeatureGrid z(Tensor({1, 2, 1, 1}, std::vector<Real>{2, 4}), 1);
  const FrameStats s = frame_channel_stats(z);
  CHECK(s.mu[0] == doctest::Approx(3));
  CHECK(s.sigma2[0] == doctest::Approx(1));
  FeatureGrid flat(Tensor({1, 3, 1, 1}, 7.0f), 1);
  CHECK(frame_channel_stats(flat).sigma2[0] == 0);
}

TEST_CASE("stats vectors concatenate means then variances per location") {
  const FeatureGrid z = grid(3, 4, 2, 2, 1);
  const FrameStats s = frame_channel_stats(z);
  const Tensor v = stats_vectors(s);
  REQUIRE(v.shape() == Shape{4, 6});
  for (int loc = 0; loc < 4; ++loc)
    for (int f = 0; f < 3; ++f) {
      CHECK(v[loc * 6 + f] == s.mu[f * 4 + loc]);
      CHECK(v[loc * 6 + 3 + f] == s.sigma2[f * 4 + loc]);
    }
}

TEST_CASE("k-means recovers distinct samples and the mean for k=1") {
  Tensor samples({4, 2}, std::vector<Real>{0, 0, 5, 5, -3, 1, 2, -7});
  const Tensor c4 = kmeans(samples, 4, 1);
  CHECK(quantization_sse(samples, c4) == doctest::Approx(0.0));
  const Tensor c1 = kmeans(samples, 1, 1);
  CHECK(c1[0] == doctest::Approx(1.0));
  CHECK(c1[1] == doctest::Approx(-0.25));
  CHECK_THROWS_AS(kmeans(samples, 5, 1), Error);
}

TEST_CASE("motion bank from features has clipped non-negative variances") {
  std::vector<FeatureGrid> feats{grid(2, 4, 3, 3, 1), grid(2, 4, 3, 3, 2)};
  const MotionStatsBank bank = build_motion_bank(feats, 5, 3);
  CHECK(bank.size() == 5);
  CHECK(bank.frames == 2);
  for (int i = 0; i < 5; ++i)
    for (int f = 0; f < 2; ++f) CHECK(bank.row(i)[2 + f] >= 0);
}

TEST_CASE("match_stats picks the nearest entry") {
  MotionStatsBank bank{Tensor({2, 2}, std::vector<Real>{0, 0, 1, 1}), 1};
  FrameStats q{Tensor({1, 1, 1}, 0.2f), Tensor({1, 1, 1}, 0.1f)};
  CHECK(match_indices(q, bank) == std::vector<int>{0});
  FrameStats exact{Tensor({1, 1, 1}, 1.0f), Tensor({1, 1, 1}, 1.0f)};
  const FrameStats m = match_stats(exact, bank);
  CHECK(m.mu[0] == 1);
  CHECK(m.sigma2[0] == 1);
}

TEST_CASE("match_indices agrees with an exhaustive scan") {
  Rng rng(9);
  const int f = 4, m = 50;
  Tensor entries({m, 2 * f});
  for (auto& v : entries.values()) v = static_cast<Real>(rng.normal());
  MotionStatsBank bank{entries, f};
  const FrameStats s = frame_channel_stats(grid(f, 6, 5, 5, 10));
  const Tensor q = stats_vectors(s);
  const auto idx = match_indices(s, bank);
  const oracle::Vec b(entries.values().begin(), entries.values().end());
  for (int loc = 0; loc < 25; ++loc) {
    double row[8];
    for (int j = 0; j < 2 * f; ++j) row[j] = q[loc * 2 * f + j];
    CHECK(idx[static_cast<size_t>(loc)] == oracle::nearest(row, b, m, 2 * f));
  }
}

TEST_CASE("modulation closed forms") {
  FeatureGrid z(Tensor({1, 2, 1, 1}, std::vector<Real>{1, 3}), 1);
  const FrameStats s = frame_channel_stats(z);
  FrameStats target{Tensor({1, 1, 1}, 0.0f), Tensor({1, 1, 1}, 4.0f)};
  const FeatureGrid out = modulate(z, s, target, ModulationVariant::kAdainCorrected, 1e-5);
  CHECK(out.values[0] == doctest::Approx(-2.0).epsilon(1e-4));
  CHECK(out.values[1] == doctest::Approx(2.0).epsilon(1e-4));

  FrameStats flat{Tensor({1, 1, 1}, 0.7f), Tensor({1, 1, 1}, 0.0f)};
  const FeatureGrid collapsed = modulate(z, s, flat, ModulationVariant::kAdainCorrected, 1e-5);
  CHECK(collapsed.values[0] == Real(0.7f));
  CHECK(collapsed.values[1] == Real(0.7f));
}

TEST_CASE("modulating to the source statistics is the identity") {
  const FeatureGrid z = grid(2, 5, 3, 3, 4, 2.0);
  const FrameStats s = frame_channel_stats(z);
  for (auto variant : {ModulationVariant::kAdainCorrected, ModulationVariant::kAsPrinted}) {
    const double eps = 1e-5;
    const FeatureGrid out = modulate(z, s, s, variant, eps);
    double spread = 0;
    for (std::int64_t i = 0; i < z.values.numel(); ++i) spread = std::max(spread, double(std::abs(z.values[i])));
    for (std::int64_t i = 0; i < z.values.numel(); ++i)
      CHECK(std::abs(out.values[i] - z.values[i]) <= eps * (1 + 2 * spread) + 1e-5);
  }
}

TEST_CASE("modulation rejects non-positive epsilon") {
  const FeatureGrid z = grid(1, 2, 1, 1, 1);
  const FrameStats s = frame_channel_stats(z);
  CHECK_THROWS_AS(modulate(z, s, s, ModulationVariant::kAdainCorrected, 0.0), Error);
}

TEST_CASE("a fresh fusion module is the identity on content") {
  FusionConfig fc;
  fc.channels = 6;
  fc.heads = 2;
  fc.seed = 1;
  FusionModule fusion(fc);
  const FeatureGrid a = grid(2, 6, 3, 3, 1), b = grid(2, 6, 3, 3, 2);
  const FeatureGrid out = fuse(a, b, fusion);
  for (std::int64_t i = 0; i < a.values.numel(); ++i) CHECK(out.values[i] == doctest::Approx(a.values[i]).epsilon(1e-6));
}

TEST_CASE("motion bank file round trip and sidecar") {
  const auto path = std::filesystem::temp_directory_path() / "dptc_unit_bank" / "motion.bin";
  std::filesystem::remove_all(path.parent_path());
  Tensor e({3, 4});
  for (std::int64_t i = 0; i < e.numel(); ++i) e[i] = static_cast<Real>(i) * 0.5f;
  save_motion_bank(MotionStatsBank{e, 2}, MotionBankInfo{7, 11, 50}, path);
  MotionBankInfo info;
  const MotionStatsBank r = load_motion_bank(path, &info);
  CHECK(r.frames == 2);
  CHECK(r.entries.storage() == e.storage());
  CHECK(info.source_clip_count == 7);
  CHECK(info.seed == 11);
  CHECK(std::filesystem::exists(path.string() + ".json"));
  std::ofstream(path, std::ios::binary | std::ios::trunc) << "xx";
  CHECK_THROWS_AS(load_motion_bank(path), Error);
  std::filesystem::remove_all(path.parent_path());
}

TEST_CASE("variant names round trip") {
  for (auto v : {ModulationVariant::kAdainCorrected, ModulationVariant::kAsPrinted})
    CHECK(parse_modulation_variant(to_string(v)) == v);
}
