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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "core/common.hpp"

DPTC_BEGIN_NAMESPACE

inline constexpr const char* kManifestFile = "manifest.json";

struct LineageEntry {
  std::string command;
  std::string path;             // artifact directory, relative to the workdir
  std::string manifest_digest;  // digest of that directory's manifest.json
};

/// Provenance record stored as manifest.json in each artifact directory.
struct RunManifest {
  std::string run_id;
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string tool_version;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::object();
  std::vector<LineageEntry> lineage;
  nlohmann::json extra = nlohmann::json::object();
  bool complete = false;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& doc);
};

/// Atomically writes `dir/manifest.json`.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& dir);
std::optional<RunManifest> read_manifest(const std::filesystem::path& dir);
/// Digest of the manifest file text in `dir`; empty when absent.
std::string manifest_digest(const std::filesystem::path& dir);

/// Lineage entry pointing at `dir`, whose manifest must exist.
LineageEntry lineage_of(const std::filesystem::path& workdir, const std::filesystem::path& dir);

/// Checks every lineage link of `dir` recursively: each parent manifest must exist and
/// match its recorded digest. Returns the list of problems (empty when consistent).
std::vector<std::string> verify_lineage(const std::filesystem::path& workdir, const std::filesystem::path& dir);

std::string tool_version();

DPTC_END_NAMESPACE
