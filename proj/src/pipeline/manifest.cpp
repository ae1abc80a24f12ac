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

#include "pipeline/manifest.hpp"

#include <fstream>
#include <sstream>

#include "core/checkpoint.hpp"

#ifndef DPTC_VERSION_STRING
#define DPTC_VERSION_STRING "0.0.0"
#endif

DPTC_BEGIN_NAMESPACE

namespace fs = std::filesystem;
using nlohmann::json;

std::string tool_version() { return DPTC_VERSION_STRING; }

json RunManifest::to_json() const {
  json lin = json::array();
  for (const auto& l : lineage)
    lin.push_back({{"command", l.command}, {"path", l.path}, {"manifest_digest", l.manifest_digest}});
  return {{"run_id", run_id},   {"command", command}, {"config_digest", config_digest},
          {"seed", seed},       {"tool_version", tool_version}, {"inputs", inputs},
          {"outputs", outputs}, {"lineage", lin},     {"extra", extra},
          {"complete", complete}};
}

RunManifest RunManifest::from_json(const json& doc) {
  RunManifest m;
  try {
    m.run_id = doc.value("run_id", "");
    m.command = doc.value("command", "");
    m.config_digest = doc.value("config_digest", "");
    m.seed = doc.value("seed", std::uint64_t{0});
    m.tool_version = doc.value("tool_version", "");
    m.inputs = doc.value("inputs", json::object());
    m.outputs = doc.value("outputs", json::object());
    m.extra = doc.value("extra", json::object());
    m.complete = doc.value("complete", false);
    for (const auto& l : doc.value("lineage", json::array()))
      m.lineage.push_back({l.value("command", ""), l.value("path", ""), l.value("manifest_digest", "")});
  } catch (const json::exception& e) {
    fail(ErrorCode::kIo, std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const RunManifest& manifest, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path target = dir / kManifestFile;
  const fs::path tmp = dir / (std::string(kManifestFile) + ".tmp");
  {
    std::ofstream os(tmp);
    os << manifest.to_json().dump(2) << '\n';
    if (!os) fail(ErrorCode::kIo, "cannot write " + target.string());
  }
  fs::rename(tmp, target);
}

namespace {

std::optional<std::string> read_text(const fs::path& path) {
  std::ifstream is(path);
  if (!is) return std::nullopt;
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

std::optional<RunManifest> read_manifest(const fs::path& dir) {
  const auto text = read_text(dir / kManifestFile);
  if (!text) return std::nullopt;
  const json doc = json::parse(*text, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::kIo, "malformed manifest in " + dir.string());
  return RunManifest::from_json(doc);
}

std::string manifest_digest(const fs::path& dir) {
  const auto text = read_text(dir / kManifestFile);
  return text ? digest_hex(*text) : std::string();
}

LineageEntry lineage_of(const fs::path& workdir, const fs::path& dir) {
  const auto m = read_manifest(dir);
  if (!m) fail(ErrorCode::kMissingPrerequisite, "no manifest in " + dir.string());
  std::error_code ec;
  fs::path rel = fs::relative(dir, workdir, ec);
  if (ec || rel.empty()) rel = dir;
  return {m->command, rel.generic_string(), manifest_digest(dir)};
}

std::vector<std::string> verify_lineage(const fs::path& workdir, const fs::path& dir) {
  std::vector<std::string> problems;
  const auto m = read_manifest(dir);
  if (!m) return {"no manifest in " + dir.string()};
  for (const auto& l : m->lineage) {
    const fs::path parent = fs::path(l.path).is_absolute() ? fs::path(l.path) : workdir / l.path;
    const std::string d = manifest_digest(parent);
    if (d.empty()) {
      problems.push_back(dir.string() + ": missing parent manifest " + parent.string());
      continue;
    }
    if (d != l.manifest_digest) problems.push_back(dir.string() + ": parent manifest changed: " + parent.string());
    const auto sub = verify_lineage(workdir, parent);
    problems.insert(problems.end(), sub.begin(), sub.end());
  }
  return problems;
}

DPTC_END_NAMESPACE
