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
#include <filesystem>
#include <numeric>

#include "doctest.h"

#include "eval/metrics.hpp"
#include "media/degradation.hpp"
#include "media/image_io.hpp"
#include "media/jpeg_codec.hpp"
#include "media/toy_faces.hpp"

using namespace dptc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_gray_frames(const fs::path& dir, int count, std::uint8_t value, int size = 16) {
  fs::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06d.png", i);
    write_png(dir / name, Image8{size, size, 1, std::vector<std::uint8_t>(static_cast<size_t>(size) * size, value)});
  }
}

Tensor constant_frame(int c, int h, int w, Real v) { return Tensor({c, h, w}, v); }

double frame_std(const Tensor& f) {
  double m = 0;
  for (Real v : f.values()) m += v;
  m /= static_cast<double>(f.numel());
  double s = 0;
  for (Real v : f.values()) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(f.numel()));
}

VideoClip toy_clip(int index = 0) { return render_toy_face(ToyFaceOptions{1, 8, 32, 5}, index); }

}  // namespace

TEST_CASE("load_clip reads the first frames in order") {
  TempDir tmp("dptc_unit_load");
  write_gray_frames(tmp.path / "a", 10, 255);
  const VideoClip c = load_clip(tmp.path / "a", 8);
  CHECK(c.frame_count() == 8);
  CHECK(c.channels() == 1);
  CHECK(std::all_of(c.frames.values().begin(), c.frames.values().end(), [](Real v) { return v == 1.0f; }));
}

TEST_CASE("load_clip rejects short or missing clips") {
  TempDir tmp("dptc_unit_load_err");
  write_gray_frames(tmp.path / "short", 3, 10);
  try {
    load_clip(tmp.path / "short", 8);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("insufficient frames") != std::string::npos);
  }
  CHECK_THROWS_AS(load_clip(tmp.path / "missing", 8), Error);
  write_gray_frames(tmp.path / "mixed", 2, 10, 16);
  write_png(tmp.path / "mixed" / "000002.png", Image8{8, 8, 1, std::vector<std::uint8_t>(64, 0)});
  CHECK_THROWS_AS(load_clip(tmp.path / "mixed"), Error);
}

TEST_CASE("save_clip and load_clip round trip at 8 bits") {
  TempDir tmp("dptc_unit_roundtrip");
  const VideoClip c = toy_clip();
  save_clip(c, tmp.path / "c");
  CHECK(fs::exists(tmp.path / "c" / "000000.png"));
  const VideoClip r = load_clip(tmp.path / "c");
  REQUIRE(r.frames.shape() == c.frames.shape());
  double worst = 0;
  for (std::int64_t i = 0; i < c.frames.numel(); ++i) worst = std::max(worst, double(std::abs(r.frames[i] - c.frames[i])));
  CHECK(worst <= 0.5 / 255 + 1e-6);
}

TEST_CASE("degenerate intervals pin parameters") {
  DegradationRanges r;
  r.rho = {2, 2};
  r.b = {4, 4};
  r.sigma = {0, 0};
  r.w = {90, 90};
  r.seed = 9;
  const auto p = sample_degradation_params(r);
  CHECK(p.blur_sigma == 2.0);
  CHECK(p.down_factor == 4.0);
  CHECK(p.noise_sigma == 0.0);
  CHECK(p.jpeg_quality == 90);
}

TEST_CASE("parameter sampling is deterministic and bounded") {
  DegradationRanges r;
  r.seed = 123;
  CHECK(sample_degradation_params(r) == sample_degradation_params(r));
  Rng rng(77);
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 10000; ++i) {
    const auto p = sample_degradation_params(r, rng);
    lo = std::min(lo, p.noise_sigma);
    hi = std::max(hi, p.noise_sigma);
    CHECK(p.blur_sigma > 0);
    CHECK(p.down_factor >= 1);
    CHECK((p.jpeg_quality >= 1 && p.jpeg_quality <= 100));
  }
  CHECK(lo >= 0.0);
  CHECK(hi <= 11.0);
}

TEST_CASE("ranges outside the legal domain are rejected") {
  DegradationRanges r;
  r.rho = {3, 2};
  CHECK_THROWS_AS(r.validate(), Error);
  r = DegradationRanges{};
  r.w = {40, 100};
  CHECK_THROWS_AS(r.validate(), Error);
}

TEST_CASE("blur kernel is normalized with the documented support") {
  for (double s : {0.1, 0.5, 1.0, 2.5, 7.0, 10.0}) {
    const auto k = gaussian_kernel(s);
    CHECK(k.size() == static_cast<size_t>(2 * std::ceil(3 * s) + 1));
    CHECK(std::accumulate(k.begin(), k.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("near-identity degradation leaves the frame almost unchanged") {
  const VideoClip c = toy_clip();
  const Tensor f = c.frame(3);
  const Tensor d = degrade_frame(f, DegradationParams{1e-6, 1.0, 0.0, 100}, 1);
  REQUIRE(d.shape() == f.shape());
  double worst = 0;
  for (std::int64_t i = 0; i < f.numel(); ++i) worst = std::max(worst, double(std::abs(d[i] - f[i])));
  CHECK(worst <= 0.02);
}

TEST_CASE("blurring a constant frame keeps it constant") {
  for (double rho : {0.5, 3.0, 9.0}) {
    const Tensor d = degrade_frame(constant_frame(3, 32, 32, 0.5f), DegradationParams{rho, 1.0, 0.0, 100}, 2);
    for (Real v : d.values()) CHECK(std::abs(v - 0.5) <= 0.02);
  }
}

TEST_CASE("noise standard deviation matches sigma / 255") {
  double sum = 0;
  for (int seed = 0; seed < 100; ++seed)
    sum += frame_std(degrade_frame(constant_frame(3, 64, 64, 0.5f), DegradationParams{1e-6, 1.0, 10.0, 100},
                                   static_cast<std::uint64_t>(seed)));
  const double mean_std = sum / 100;
  CHECK(mean_std >= 0.030);
  CHECK(mean_std <= 0.048);
}

TEST_CASE("degraded output stays in range for random draws") {
  const Tensor f = toy_clip(1).frame(0);
  DegradationRanges r;
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    DegradationParams p = sample_degradation_params(r, rng);
    p.down_factor = std::min(p.down_factor, 8.0);  // keep a few pixels on 32x32 frames
    const Tensor d = degrade_frame(f, p, static_cast<std::uint64_t>(i));
    REQUIRE(d.shape() == f.shape());
    for (Real v : d.values()) REQUIRE((v >= 0 && v <= 1));
  }
}

TEST_CASE("more noise never raises PSNR") {
  const VideoClip c = toy_clip(2);
  const Tensor f = c.frame(0);
  double prev = 1e9;
  for (double s : {0.0, 2.0, 4.0, 8.0, 10.0}) {
    const Tensor d = degrade_frame(f, DegradationParams{1.0, 2.0, s, 95}, 11);
    const double p = psnr(VideoClip(f.reshaped({1, f.dim(0), f.dim(1), f.dim(2)})),
                          VideoClip(d.reshaped({1, d.dim(0), d.dim(1), d.dim(2)})));
    CHECK(p <= prev + 1e-9);
    prev = p;
  }
}

TEST_CASE("per-clip degradation shares parameters and is bit-exact per seed") {
  const VideoClip c = toy_clip(3);
  DegradationRanges r;
  r.rho = {1, 3};
  r.b = {2, 4};
  r.seed = 31;
  const DegradedClip a = degrade_clip(c, r, true), b = degrade_clip(c, r, true);
  CHECK(a.clip.frames.storage() == b.clip.frames.storage());
  REQUIRE(a.frame_params.size() == 8);
  for (const auto& p : a.frame_params) CHECK(p == a.params);
  const DegradedClip per_frame = degrade_clip(c, r, false);
  bool differs = false;
  for (const auto& p : per_frame.frame_params) differs |= !(p == per_frame.frame_params.front());
  CHECK(differs);
}

TEST_CASE("degradation lowers PSNR below the near-identity configuration") {
  const VideoClip c = toy_clip(4);
  DegradationRanges heavy;
  heavy.rho = {3, 3};
  heavy.b = {4, 4};
  heavy.sigma = {5, 5};
  heavy.w = {60, 60};
  DegradationRanges light;
  light.rho = {1e-6, 1e-6};
  light.b = {1, 1};
  light.sigma = {0, 0};
  light.w = {100, 100};
  light.rho_jitter = light.b_jitter = light.sigma_jitter = light.w_jitter = 0;
  CHECK(psnr(c, degrade_clip(c, heavy).clip) < psnr(c, degrade_clip(c, light).clip));
}

TEST_CASE("gray clips survive the JPEG step as gray") {
  const VideoClip c = to_gray(toy_clip());
  DegradationRanges r;
  r.seed = 4;
  const DegradedClip d = degrade_clip(c, r);
  CHECK(d.clip.channels() == 1);
}

TEST_CASE("jpeg codec identity is recorded") { CHECK(jpeg_codec_identity().find("jpeg") != std::string::npos); }
