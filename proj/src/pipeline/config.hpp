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

#include "codec/codec_trainer.hpp"
#include "eval/report.hpp"
#include "media/degradation.hpp"
#include "media/toy_faces.hpp"
#include "training/trainer.hpp"

DPTC_BEGIN_NAMESPACE

using Json = nlohmann::json;

/// Every tunable of the pipeline. Module seeds are derived from `seed`.
struct PipelineConfig {
  std::uint64_t seed = 0;
  ToyFaceOptions toy;
  DegradationRanges degradation;
  bool per_clip_params = true;
  CodecConfig codec;
  CodecTrainOptions codec_training;
  int codec_ckpt_every = 500;
  PredictorConfig predictor;
  MotionConfig motion;
  TrainConfig training;
  EvalOptions eval;

  /// Pushes `seed` into the module configs.
  void propagate_seed();
};

/// Full-scale defaults (bank sizes 1024 / 16384, d_model 256, lr 8e-5).
PipelineConfig default_config();
/// Small configuration sized for the bundled 64x64 toy set on one CPU core.
PipelineConfig toy_config();

Json config_to_json(const PipelineConfig& cfg);
/// Reads sections present in `doc` over `base`. Unknown keys or bad types throw kConfig.
PipelineConfig config_from_json(const Json& doc, PipelineConfig base = default_config());

/// Loads a config file; a top-level "preset": "toy" | "default" selects the base.
PipelineConfig load_config_file(const std::filesystem::path& path);
/// Applies "section.key=value" overrides to a config document; the value is parsed as JSON
/// when possible, otherwise taken as a string.
void apply_override(Json& doc, const std::string& assignment);

/// Digest of the listed sections of the canonical config document.
std::string section_digest(const PipelineConfig& cfg, const std::vector<std::string>& sections);

/// "a:b" or "a" -> interval.
Interval parse_interval(const std::string& text);

Json codec_config_to_json(const CodecConfig& cfg);
CodecConfig codec_config_from_json(const Json& doc, CodecConfig base = {});
Json restoration_config_to_json(const RestorationConfig& cfg);
RestorationConfig restoration_config_from_json(const Json& doc);

DPTC_END_NAMESPACE
