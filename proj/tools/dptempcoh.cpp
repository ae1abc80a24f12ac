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

// Command-line front end. Everything goes through the shared C API.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dptc/dptc.h"

namespace {

using nlohmann::json;

struct Option {
  std::string flag;  // CLI11 spec, e.g. "--in"
  std::string key;   // JSON key
  std::string help;
  enum Kind { kString, kInt, kFlag } kind = kString;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<Option> options;
};

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> specs = {
      {"toy-data", "Render the synthetic face clip set",
       {{"--out", "out", "output root (default data/hq)"}, {"--clips", "clips", "number of clips", Option::kInt}}},
      {"degrade", "Synthesize degraded clips",
       {{"--in", "in", "HQ clip root (default data/hq)"},
        {"--out", "out", "LQ output root (default data/lq)"},
        {"--rho", "rho", "blur sigma interval a:b"},
        {"--b", "b", "downsampling factor interval a:b"},
        {"--sigma", "sigma", "noise std interval a:b (0-255 units)"},
        {"--w", "w", "JPEG quality interval a:b"},
        {"--per-frame", "per_frame", "draw parameters per frame", Option::kFlag}}},
      {"pretrain-codec", "Stage 1: train the vector-quantized codec",
       {{"--hq", "hq", "HQ clip root (default data/hq)"},
        {"--run-id", "run_id", "run name under runs/ (default codec)"},
        {"--steps", "steps", "training steps", Option::kInt}}},
      {"build-motion-bank", "Cluster HQ feature statistics into the motion bank",
       {{"--hq", "hq", "HQ clip root (default data/hq)"},
        {"--codec", "codec", "codec run directory (default runs/codec)"},
        {"--out", "out", "bank directory (default banks/motion)"}}},
      {"train", "Stage 2: train the restoration model",
       {{"--lq", "lq", "LQ clip root (default data/lq)"},
        {"--hq", "hq", "HQ clip root (default data/hq)"},
        {"--codec", "codec", "codec run directory (default runs/codec)"},
        {"--motion-bank", "motion_bank", "bank directory (default banks/motion)"},
        {"--run-id", "run_id", "run name under runs/ (default main)"},
        {"--iterations", "iterations", "training iterations", Option::kInt}}},
      {"restore", "Restore LQ clips with a trained model",
       {{"--in", "in", "LQ clip root (default data/lq)"},
        {"--model", "model", "model run directory (default runs/main)"},
        {"--out", "out", "output root (default restored/main)"},
        {"--motion", "motion", "force motion modulation on", Option::kFlag},
        {"--no-motion", "no_motion", "disable motion modulation", Option::kFlag}}},
      {"eval", "Score restored clips against references",
       {{"--restored", "restored", "restored clip root (default restored/main)"},
        {"--reference", "reference", "reference clip root (default data/hq)"},
        {"--out", "out", "report directory (default reports/main)"}}},
      {"export-attention", "Write predictor attention maps for one query token",
       {{"--in", "in", "LQ clip root (default data/lq)"},
        {"--model", "model", "model run directory (default runs/main)"},
        {"--clip", "clip", "clip id (default first)"},
        {"--position", "position", "query token f,h,w"},
        {"--mode", "mode", "spatial_temporal or spatial_only"},
        {"--out", "out", "output root (default attn)"}}},
      {"verify", "Check the manifest lineage of an artifact directory",
       {{"--path", "path", "artifact directory (default reports/main)"}}},
  };
  return specs;
}

void log_to_stderr(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporally coherent blind video restoration pipeline", "dptempcoh"};
  app.set_version_flag("--version", std::string(dptc_version()));
  app.require_subcommand(1);

  std::string config, workdir;
  std::vector<std::string> overrides;
  long long seed = -1;
  bool force = false, quiet = false;
  app.add_option("--config", config, "JSON config file")->option_text("FILE");
  app.add_option("--workdir", workdir, "base directory for relative paths (default: current)");
  app.add_option("--set", overrides, "override a config value, section.key=value (repeatable)");
  app.add_option("--seed", seed, "global seed (default: the config file seed, else DPTC_SEED)")->check(CLI::NonNegativeNumber);
  app.add_flag("--force", force, "rebuild even if a complete artifact exists");
  app.add_flag("-q,--quiet", quiet, "suppress progress lines");

  std::map<std::string, std::string> strings;
  std::map<std::string, long long> ints;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& spec : commands()) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    subs[spec.name] = sub;
    // Global options are accepted after the command name too.
    sub->fallthrough();
    for (const auto& opt : spec.options) {
      const std::string id = spec.name + "." + opt.key;
      switch (opt.kind) {
        case Option::kString:
          sub->add_option(opt.flag, strings[id], opt.help);
          break;
        case Option::kInt:
          sub->add_option(opt.flag, ints[id], opt.help);
          break;
        case Option::kFlag:
          sub->add_flag(opt.flag, flags[id], opt.help);
          break;
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return dptc_exit_code(DPTC_ERR_CONFIG);
  }

  const CommandSpec* chosen = nullptr;
  for (const auto& spec : commands())
    if (subs[spec.name]->parsed()) chosen = &spec;
  if (!chosen) return dptc_exit_code(DPTC_ERR_CONFIG);
  CLI::App* sub = subs[chosen->name];

  json args = json::object();
  if (!workdir.empty()) args["workdir"] = workdir;
  if (!config.empty()) args["config"] = config;
  if (!overrides.empty()) args["set"] = overrides;
  if (seed >= 0) args["seed"] = seed;
  if (force) args["force"] = true;
  for (const auto& opt : chosen->options) {
    if (sub->count(opt.flag) == 0) continue;
    const std::string id = chosen->name + "." + opt.key;
    if (opt.kind == Option::kString) args[opt.key] = strings[id];
    else if (opt.kind == Option::kInt) args[opt.key] = ints[id];
    else args[opt.key] = true;
  }
  if (args.contains("no_motion")) {
    if (args.contains("motion")) {
      std::fprintf(stderr, "error: --motion and --no-motion are exclusive\n");
      return dptc_exit_code(DPTC_ERR_CONFIG);
    }
    args.erase("no_motion");
    args["motion"] = false;
  }

  dptc_set_log_callback(quiet ? nullptr : log_to_stderr, nullptr);
  if (quiet) dptc_set_log_callback([](const char*, void*) {}, nullptr);

  char* result = nullptr;
  const dptc_status status = dptc_run(chosen->name.c_str(), args.dump().c_str(), &result);
  if (status != DPTC_OK) {
    std::fprintf(stderr, "error: %s\n", dptc_last_error());
    return dptc_exit_code(status);
  }
  if (result) {
    std::cout << json::parse(result).dump(2) << '\n';
    dptc_string_free(result);
  }
  return 0;
}
