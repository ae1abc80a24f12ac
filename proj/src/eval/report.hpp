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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eval/metrics.hpp"

DPTC_BEGIN_NAMESPACE

struct ClipMetrics {
  std::string clip_id;
  double psnr = 0;  // may be +infinity
  double ifd = 0;
  double perceptual = 0;
  std::vector<double> frame_psnr;
  std::vector<double> frame_perceptual;
};

struct MetricReport {
  std::vector<ClipMetrics> clips;
  /// Mean over clips with finite PSNR; NaN when none is finite.
  double mean_psnr = 0;
  int psnr_infinite_excluded = 0;
  double mean_ifd = 0;
  double mean_perceptual = 0;
  std::optional<double> frechet;
  std::string config_digest;
  std::string feature_extractor;

  void aggregate();
};

struct EvalOptions {
  std::string feature_extractor = "random_conv_pyramid";
  /// Frames loaded per clip; 0 loads every frame.
  int frames = 0;
  bool frechet = true;
  std::string config_digest;
};

/// Clip directories common to both roots, by name. Throws listing any id
/// present in only one root, or when there is no common id.
std::vector<std::string> matching_clip_ids(const std::filesystem::path& restored_dir,
                                           const std::filesystem::path& reference_dir);

MetricReport evaluate_set(const std::filesystem::path& restored_dir, const std::filesystem::path& reference_dir,
                          const EvalOptions& options);

/// Writes report.json, report.csv and traces/<clip_id>.csv under `out_dir`.
void write_report(const MetricReport& report, const std::filesystem::path& out_dir);

/// Sub-directories of `root` holding at least one PNG, sorted by name.
std::vector<std::string> list_clip_ids(const std::filesystem::path& root);

DPTC_END_NAMESPACE
