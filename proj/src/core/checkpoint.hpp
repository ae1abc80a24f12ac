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
#include <string_view>
#include <utility>
#include <vector>

#include "core/autograd.hpp"

DPTC_BEGIN_NAMESPACE

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

/// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string digest_hex(std::string_view text);

/// Binary checkpoint: header {format_version, config_digest, step_count}, the
/// config document, then named tensor blocks stored little-endian in their
/// native precision.
struct Checkpoint {
  std::uint32_t format_version = kCheckpointFormatVersion;
  std::string config_digest;
  std::uint64_t step_count = 0;
  std::string config_json;
  std::vector<std::pair<std::string, Tensor>> blocks;

  void add(std::string name, Tensor value) { blocks.emplace_back(std::move(name), std::move(value)); }
  void add_params(const ParamSet& params, const std::string& prefix = "");
  const Tensor* find(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  /// Copies stored values into the matching parameters; every parameter must be present.
  void load_params(const ParamSet& params, const std::string& prefix = "") const;
};

/// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies parameter values between two sets with identical names and shapes.
void copy_param_values(const ParamSet& from, const ParamSet& to);

DPTC_END_NAMESPACE
