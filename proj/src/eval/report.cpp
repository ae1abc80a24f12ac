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

#include "eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "json.hpp"

DPTC_BEGIN_NAMESPACE

namespace fs = std::filesystem;

namespace {

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void MetricReport::aggregate() {
  double sp = 0, si = 0, sd = 0;
  int finite = 0;
  psnr_infinite_excluded = 0;
  for (const auto& c : clips) {
    if (std::isfinite(c.psnr)) {
      sp += c.psnr;
      ++finite;
    } else {
      ++psnr_infinite_excluded;
    }
    si += c.ifd;
    sd += c.perceptual;
  }
  const double n = static_cast<double>(clips.size());
  mean_psnr = finite > 0 ? sp / finite : std::numeric_limits<double>::quiet_NaN();
  mean_ifd = clips.empty() ? 0.0 : si / n;
  mean_perceptual = clips.empty() ? 0.0 : sd / n;
}

std::vector<std::string> list_clip_ids(const fs::path& root) {
  if (!fs::is_directory(root)) fail(ErrorCode::kIo, "missing clip directory " + root.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    if (!list_frame_files(entry.path()).empty()) ids.push_back(entry.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::string> matching_clip_ids(const fs::path& restored_dir, const fs::path& reference_dir) {
  const auto a = list_clip_ids(restored_dir);
  const auto b = list_clip_ids(reference_dir);
  const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::vector<std::string> common, only_a, only_b;
  for (const auto& id : a) (sb.count(id) ? common : only_a).push_back(id);
  for (const auto& id : b)
    if (!sa.count(id)) only_b.push_back(id);
  if (!only_a.empty() || !only_b.empty() || common.empty()) {
    std::string msg = common.empty() ? "no common clip ids between restored and reference sets" : "clip id mismatch";
    auto list = [](const std::vector<std::string>& ids) {
      std::string s;
      for (const auto& id : ids) s += (s.empty() ? "" : ",") + id;
      return s.empty() ? std::string("-") : s;
    };
    msg += "; only in restored: " + list(only_a) + "; only in reference: " + list(only_b);
    fail(ErrorCode::kInvalidArgument, msg);
  }
  return common;
}

MetricReport evaluate_set(const fs::path& restored_dir, const fs::path& reference_dir, const EvalOptions& options) {
  const auto ids = matching_clip_ids(restored_dir, reference_dir);
  const auto phi = make_feature_extractor(options.feature_extractor);
  MetricReport report;
  report.config_digest = options.config_digest;
  report.feature_extractor = phi->name();
  std::vector<Eigen::MatrixXd> feats_a, feats_b;
  Eigen::Index rows = 0;
  for (const auto& id : ids) {
    const VideoClip restored = options.frames > 0 ? load_clip(restored_dir / id, options.frames) : load_clip(restored_dir / id);
    const VideoClip reference =
        options.frames > 0 ? load_clip(reference_dir / id, options.frames) : load_clip(reference_dir / id);
    if (!same_geometry(to_rgb(restored), to_rgb(reference)))
      fail(ErrorCode::kInvalidArgument, "clip " + id + ": restored and reference geometry differ");
    ClipMetrics m;
    m.clip_id = id;
    const VideoClip a = to_rgb(restored), b = to_rgb(reference);
    m.psnr = psnr(a, b);
    m.ifd = restored.frame_count() >= 2 ? ifd(restored) : 0.0;
    m.frame_psnr = psnr_per_frame(a, b);
    m.frame_perceptual = perceptual_per_frame(a, b, *phi);
    double s = 0;
    for (double v : m.frame_perceptual) s += v;
    m.perceptual = s / static_cast<double>(m.frame_perceptual.size());
    report.clips.push_back(std::move(m));
    if (options.frechet) {
      feats_a.push_back(pooled_features(a, *phi));
      feats_b.push_back(pooled_features(b, *phi));
      rows += feats_a.back().rows();
    }
  }
  report.aggregate();
  if (options.frechet && rows >= 2) {
    const Eigen::Index d = feats_a.front().cols();
    Eigen::MatrixXd fa(rows, d), fb(rows, d);
    Eigen::Index r = 0;
    for (size_t i = 0; i < feats_a.size(); ++i) {
      fa.middleRows(r, feats_a[i].rows()) = feats_a[i];
      fb.middleRows(r, feats_b[i].rows()) = feats_b[i];
      r += feats_a[i].rows();
    }
    report.frechet = frechet_distance(fa, fb);
  }
  return report;
}

void write_report(const MetricReport& report, const fs::path& out_dir) {
  fs::create_directories(out_dir / "traces");
  nlohmann::json doc;
  doc["config_digest"] = report.config_digest;
  doc["feature_extractor"] = report.feature_extractor;
  doc["perceptual_metric"] = "perceptual";
  nlohmann::json agg;
  agg["psnr"] = number_or_null(report.mean_psnr);
  agg["psnr_infinite_excluded"] = report.psnr_infinite_excluded;
  agg["ifd"] = report.mean_ifd;
  agg["perceptual"] = report.mean_perceptual;
  agg["frechet"] = report.frechet ? nlohmann::json(*report.frechet) : nlohmann::json(nullptr);
  doc["aggregate"] = agg;
  doc["clips"] = nlohmann::json::array();
  for (const auto& c : report.clips) {
    doc["clips"].push_back({{"clip_id", c.clip_id},
                            {"psnr", number_or_null(c.psnr)},
                            {"psnr_infinite", std::isinf(c.psnr)},
                            {"ifd", c.ifd},
                            {"perceptual", c.perceptual}});
  }
  {
    std::ofstream os(out_dir / "report.json");
    os << doc.dump(2) << '\n';
    if (!os) fail(ErrorCode::kIo, "cannot write " + (out_dir / "report.json").string());
  }
  {
    std::ofstream os(out_dir / "report.csv");
    os << "clip_id,psnr,ifd,perceptual\n";
    for (const auto& c : report.clips)
      os << c.clip_id << ',' << format_number(c.psnr) << ',' << format_number(c.ifd) << ','
         << format_number(c.perceptual) << '\n';
    if (!os) fail(ErrorCode::kIo, "cannot write " + (out_dir / "report.csv").string());
  }
  for (const auto& c : report.clips) {
    std::ofstream os(out_dir / "traces" / (c.clip_id + ".csv"));
    os << "frame,perceptual,psnr\n";
    for (size_t f = 0; f < c.frame_psnr.size(); ++f)
      os << f << ',' << format_number(c.frame_perceptual[f]) << ',' << format_number(c.frame_psnr[f]) << '\n';
    if (!os) fail(ErrorCode::kIo, "cannot write trace for " + c.clip_id);
  }
}

DPTC_END_NAMESPACE
