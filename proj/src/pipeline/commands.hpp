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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pipeline/config.hpp"
#include "pipeline/manifest.hpp"

DPTC_BEGIN_NAMESPACE

/// Receives progress lines from long-running commands (stderr by default).
using LogSink = std::function<void(const std::string&)>;
void set_log_sink(LogSink sink);
void log_line(const std::string& line);

/// Names accepted by run_command.
const std::vector<std::string>& command_names();

/// Runs one pipeline command. `args` is a JSON object of options:
///   common: workdir, config (file path), set (array of "section.key=value"),
///           seed, force
///   command-specific keys are documented in the README.
/// Returns a JSON summary; failures throw Error.
Json run_command(const std::string& command, const Json& args);

/// Loads `<run_dir>/model.ckpt` written by the train command, motion bank included.
std::unique_ptr<RestorationModel> load_restoration_model(const std::filesystem::path& run_dir);

/// Process exit code for an error category.
int exit_code_for(ErrorCode code);

/// Clip windows of `frames` frames from a clip root. A root holding PNGs
/// directly is one clip named after the directory. Tails shorter than a
/// window are dropped unless `pad_tail`, which repeats the last frame.
struct ClipWindow {
  std::string clip_id;
  int window = 0;
  int valid_frames = 0;
  VideoClip clip;
};
std::vector<ClipWindow> load_clip_windows(const std::filesystem::path& root, int frames, bool pad_tail);

DPTC_END_NAMESPACE
