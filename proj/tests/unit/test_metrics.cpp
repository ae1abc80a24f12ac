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

#include "eval/metrics.hpp"
#include "eval/report.hpp"
#include "media/toy_faces.hpp"

using namespace dptc;
namespace fs = std::filesystem;

TEST_CASE("psnr closed forms") {
  const VideoClip a(Tensor({2, 1, 8, 8}, 0.5f));
  CHECK(std::isinf(psnr(a, a)));
  VideoClip b = a;
  for (auto& v : b.frames.values()) v += Real(0.1);  // MSE 0.01
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-6));
  CHECK_THROWS_AS(psnr(a, VideoClip(Tensor({2, 1, 8, 16}, 0.5f))), Error);
}

TEST_CASE("ifd closed forms") {
  CHECK(ifd(VideoClip(Tensor({3, 3, 8, 8}, 0.3f))) == 0.0);
  Tensor t({2, 1, 8, 8}, 0.0f);
  for (int i = 64; i < 128; ++i) t[i] = 1;
  CHECK(ifd(VideoClip(t)) == doctest::Approx(65025.0).epsilon(1e-9));
  CHECK_THROWS_AS(ifd(VideoClip(Tensor({1, 1, 8, 8}, 0.3f))), Error);
}

TEST_CASE("perceptual distance is zero only for identical clips") {
  const VideoClip a = render_toy_face(ToyFaceOptions{2, 4, 32, 1}, 0), b = render_toy_face(ToyFaceOptions{2, 4, 32, 1}, 1);
  RandomConvPyramid phi;
  CHECK(perceptual_distance(a, a, phi) == 0.0);
  CHECK(perceptual_distance(a, b, phi) > 0.0);
  CHECK(perceptual_per_frame(a, b, phi).size() == 4);
}

TEST_CASE("frechet distance identity, symmetry and mean shift") {
  Rng rng(1);
  Eigen::MatrixXd a(400, 3), b(400, 3);
  for (int i = 0; i < 400; ++i)
    for (int j = 0; j < 3; ++j) {
      a(i, j) = rng.normal();
      b(i, j) = 0.5 * rng.normal() + (j == 0 ? 1.0 : 0.0);
    }
  CHECK(std::abs(frechet_distance(a, a)) <= 1e-6);
  CHECK(std::abs(frechet_distance(a, b) - frechet_distance(b, a)) <= 1e-6);

  Eigen::MatrixXd x(10000, 1), y(10000, 1);
  for (int i = 0; i < 10000; ++i) {
    x(i, 0) = rng.normal();
    y(i, 0) = rng.normal() + 3.0;
  }
  CHECK(frechet_distance(x, y) == doctest::Approx(9.0).epsilon(0.5 / 9.0));
}

TEST_CASE("evaluate_set on identical sets") {
  const fs::path root = fs::temp_directory_path() / "dptc_unit_eval";
  fs::remove_all(root);
  for (int i = 0; i < 2; ++i) {
    const VideoClip c = render_toy_face(ToyFaceOptions{2, 4, 32, 1}, i);
    save_clip(c, root / "ref" / ("c" + std::to_string(i)));
    save_clip(c, root / "out" / ("c" + std::to_string(i)));
  }
  EvalOptions opt;
  opt.frechet = false;
  const MetricReport r = evaluate_set(root / "out", root / "ref", opt);
  REQUIRE(r.clips.size() == 2);
  CHECK(std::isnan(r.mean_psnr));
  CHECK(r.psnr_infinite_excluded == 2);
  CHECK(r.mean_perceptual == 0.0);
  double ref_ifd = 0;
  for (int i = 0; i < 2; ++i) ref_ifd += ifd(load_clip(root / "ref" / ("c" + std::to_string(i))));
  CHECK(r.mean_ifd == doctest::Approx(ref_ifd / 2));
  write_report(r, root / "report");
  CHECK(fs::exists(root / "report" / "report.json"));
  CHECK(fs::exists(root / "report" / "report.csv"));
  CHECK(fs::exists(root / "report" / "traces" / "c0.csv"));
  std::ifstream js(root / "report" / "report.json");
  const std::string text((std::istreambuf_iterator<char>(js)), std::istreambuf_iterator<char>());
  CHECK(text.find("psnr_infinite") != std::string::npos);

  fs::create_directories(root / "other");
  save_clip(render_toy_face(ToyFaceOptions{2, 4, 32, 1}, 0), root / "other" / "zz");
  CHECK_THROWS_AS(evaluate_set(root / "other", root / "ref", opt), Error);
  fs::remove_all(root);
}
