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

#include "pipeline/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "core/checkpoint.hpp"
#include "media/image_io.hpp"
#include "media/jpeg_codec.hpp"

DPTC_BEGIN_NAMESPACE

namespace fs = std::filesystem;

namespace {

LogSink& sink() {
  static LogSink s = [](const std::string& line) { std::cerr << line << '\n'; };
  return s;
}

// ---------------------------------------------------------------- arguments

struct Context {
  fs::path workdir;
  PipelineConfig config;
  bool force = false;
  const Json* args = nullptr;

  fs::path path(const char* key, const std::string& fallback) const {
    const fs::path p = args->contains(key) ? fs::path(args->at(key).get<std::string>()) : fs::path(fallback);
    return p.is_absolute() ? p : workdir / p;
  }
  std::string str(const char* key, const std::string& fallback) const {
    if (!args->contains(key)) return fallback;
    const Json& v = args->at(key);
    if (!v.is_string()) fail(ErrorCode::kConfig, std::string("option '") + key + "' must be a string");
    return v.get<std::string>();
  }
  bool flag(const char* key) const { return args->contains(key) && args->at(key).is_boolean() && args->at(key).get<bool>(); }
  bool has(const char* key) const { return args->contains(key) && !args->at(key).is_null(); }
  long long integer(const char* key, long long fallback) const {
    if (!has(key)) return fallback;
    const Json& v = args->at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_string()) {
      try {
        size_t used = 0;
        const long long x = std::stoll(v.get<std::string>(), &used);
        if (used == v.get<std::string>().size()) return x;
      } catch (const std::logic_error&) {
      }
    }
    fail(ErrorCode::kConfig, std::string("option '") + key + "' must be an integer");
  }
};

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("DPTC_SEED");
  if (!s || !*s) return std::nullopt;
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used == std::string(s).size()) return v;
  } catch (const std::logic_error&) {
  }
  fail(ErrorCode::kConfig, std::string("DPTC_SEED is not an unsigned integer: ") + s);
}

Context make_context(const Json& args) {
  if (!args.is_object()) fail(ErrorCode::kConfig, "command options must be a JSON object");
  Context ctx;
  ctx.args = &args;
  ctx.workdir = args.contains("workdir") ? fs::path(args.at("workdir").get<std::string>()) : fs::current_path();
  ctx.force = ctx.flag("force");

  Json doc = Json::object();
  PipelineConfig base = default_config();
  if (args.contains("config") && !args.at("config").is_null()) {
    fs::path cfg_path = args.at("config").get<std::string>();
    if (!cfg_path.is_absolute() && !fs::exists(cfg_path)) cfg_path = ctx.workdir / cfg_path;
    std::ifstream is(cfg_path);
    if (!is) fail(ErrorCode::kIo, "cannot open config file " + cfg_path.string());
    doc = Json::parse(is, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
      fail(ErrorCode::kConfig, "config file " + cfg_path.string() + " is not a JSON object");
    const std::string preset = doc.value("preset", "default");
    if (preset == "toy") base = toy_config();
    else if (preset != "default") fail(ErrorCode::kConfig, "unknown preset '" + preset + "'");
  } else if (args.value("preset", "") == "toy") {
    base = toy_config();
  }
  const bool file_seed = doc.contains("seed");
  if (args.contains("set"))
    for (const auto& s : args.at("set")) apply_override(doc, s.get<std::string>());
  if (ctx.has("seed")) doc["seed"] = static_cast<std::uint64_t>(ctx.integer("seed", 0));
  else if (!file_seed && !doc.contains("seed"))
    if (const auto s = env_seed()) doc["seed"] = *s;
  ctx.config = config_from_json(doc, base);
  return ctx;
}

std::string rel(const Context& ctx, const fs::path& p) {
  std::error_code ec;
  const fs::path r = fs::relative(p, ctx.workdir, ec);
  return (ec || r.empty() || r.string().rfind("..", 0) == 0) ? p.generic_string() : r.generic_string();
}

// Returns true when `dir` already holds a complete artifact for `digest`.
bool up_to_date(const Context& ctx, const fs::path& dir, const std::string& command, const std::string& digest) {
  if (ctx.force) return false;
  const auto m = read_manifest(dir);
  if (!m || !m->complete) return false;
  if (m->command != command) return false;
  if (m->config_digest != digest)
    fail(ErrorCode::kConfig, dir.string() + " holds a complete '" + command +
                                 "' artifact built with a different configuration; pass --force to rebuild");
  log_line(command + ": " + dir.string() + " is up to date (use --force to rebuild)");
  return true;
}

RunManifest start_manifest(const Context& ctx, const std::string& command, const std::string& run_id,
                           const std::string& digest) {
  RunManifest m;
  m.run_id = run_id;
  m.command = command;
  m.config_digest = digest;
  m.seed = ctx.config.seed;
  m.tool_version = tool_version();
  return m;
}

Json skipped(const fs::path& dir) { return {{"status", "up_to_date"}, {"path", dir.string()}}; }

// ------------------------------------------------------------------ clips

std::vector<std::pair<std::string, fs::path>> clip_dirs(const fs::path& root) {
  if (!fs::is_directory(root)) fail(ErrorCode::kIo, "missing clip directory " + root.string());
  if (!list_frame_files(root).empty()) return {{root.filename().string(), root}};
  std::vector<std::pair<std::string, fs::path>> out;
  for (const auto& id : list_clip_ids(root)) out.emplace_back(id, root / id);
  if (out.empty()) fail(ErrorCode::kIo, "no clip directories with PNG frames under " + root.string());
  return out;
}

std::string params_digest(const DegradationParams& p) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%d", p.blur_sigma, p.down_factor, p.noise_sigma, p.jpeg_quality);
  return buf;
}

// ------------------------------------------------------------ checkpoints

fs::path latest_step_checkpoint(const fs::path& dir, std::int64_t* step) {
  fs::path best;
  std::int64_t best_step = -1;
  if (!fs::is_directory(dir)) return best;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("step_", 0) != 0 || e.path().extension() != ".ckpt") continue;
    try {
      const std::int64_t s = std::stoll(name.substr(5, name.size() - 10));
      if (s > best_step) {
        best_step = s;
        best = e.path();
      }
    } catch (const std::logic_error&) {
    }
  }
  if (step) *step = best_step;
  return best;
}

void remove_step_checkpoints(const fs::path& dir) {
  std::vector<fs::path> stale;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("step_", 0) == 0 && e.path().extension() == ".ckpt") stale.push_back(e.path());
  }
  for (const auto& p : stale) fs::remove(p);
}

void truncate_log(const fs::path& log, std::int64_t last_step) {
  std::ifstream is(log);
  if (!is) return;
  std::vector<std::string> keep;
  std::string line;
  while (std::getline(is, line)) {
    const Json j = Json::parse(line, nullptr, false);
    if (!j.is_discarded() && j.value("step", std::int64_t{0}) <= last_step) keep.push_back(line);
  }
  is.close();
  std::ofstream os(log, std::ios::trunc);
  for (const auto& l : keep) os << l << '\n';
}

fs::path codec_checkpoint_path(const fs::path& run) { return run / "codec.ckpt"; }
fs::path model_checkpoint_path(const fs::path& run) { return run / "model.ckpt"; }

VqCodec load_codec(const fs::path& run) {
  const fs::path path = codec_checkpoint_path(run);
  if (!fs::exists(path))
    fail(ErrorCode::kMissingPrerequisite,
         "missing prerequisite: codec checkpoint " + path.string() + " not found (run pretrain-codec first)");
  const Checkpoint ckpt = load_checkpoint(path);
  const Json doc = Json::parse(ckpt.config_json, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::kIo, "codec checkpoint has a malformed config");
  VqCodec codec(codec_config_from_json(doc.at("codec")));
  ckpt.load_params(codec.all_params());
  return codec;
}

Checkpoint model_checkpoint(const RestorationModel& model, const Json& meta, std::uint64_t steps) {
  Checkpoint ckpt;
  Json doc = meta;
  doc["restoration"] = restoration_config_to_json(model.config());
  ckpt.config_json = doc.dump();
  ckpt.config_digest = digest_hex(ckpt.config_json);
  ckpt.step_count = steps;
  ckpt.add_params(model.all_params());
  if (const auto& bank = model.motion_bank()) {
    ckpt.add("motion.entries", bank->entries);
    ckpt.add("motion.frames", Tensor::scalar(static_cast<Real>(bank->frames)));
  }
  return ckpt;
}

struct LoadedModel {
  std::unique_ptr<RestorationModel> model;
  Json meta;
};

LoadedModel load_model_checkpoint(const Checkpoint& ckpt) {
  const Json doc = Json::parse(ckpt.config_json, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::kIo, "model checkpoint has a malformed config");
  LoadedModel out;
  out.meta = doc;
  out.model = std::make_unique<RestorationModel>(restoration_config_from_json(doc.at("restoration")));
  ckpt.load_params(out.model->all_params());
  if (const Tensor* e = ckpt.find("motion.entries"))
    out.model->set_motion_bank(MotionStatsBank{*e, static_cast<int>(ckpt.get("motion.frames")[0])});
  return out;
}

LoadedModel load_model(const fs::path& run) {
  const fs::path path = model_checkpoint_path(run);
  if (!fs::exists(path))
    fail(ErrorCode::kMissingPrerequisite,
         "missing prerequisite: model checkpoint " + path.string() + " not found (run train first)");
  return load_model_checkpoint(load_checkpoint(path));
}

void append_jsonl(std::ofstream& os, const Json& j) {
  os << j.dump() << '\n';
  os.flush();
}

// --------------------------------------------------------------- commands

Json cmd_toy_data(const Context& ctx) {
  const fs::path out = ctx.path("out", "data/hq");
  ToyFaceOptions opts = ctx.config.toy;
  if (ctx.has("clips")) opts.clips = static_cast<int>(ctx.integer("clips", opts.clips));
  const std::string digest = digest_hex(Json{{"toy_data", config_to_json(ctx.config)["toy_data"]}, {"clips", opts.clips}}.dump());
  if (up_to_date(ctx, out, "toy-data", digest)) return skipped(out);
  RunManifest m = start_manifest(ctx, "toy-data", out.filename().string(), digest);
  m.seed = opts.seed;
  Json ids = Json::array();
  for (int i = 0; i < opts.clips; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "clip_%03d", i);
    save_clip(render_toy_face(opts, i), out / id);
    ids.push_back(id);
  }
  m.outputs = {{"clips", ids}, {"frames", opts.frames}, {"size", opts.size}};
  m.complete = true;
  write_manifest(m, out);
  log_line("toy-data: wrote " + std::to_string(opts.clips) + " clips to " + out.string());
  return {{"status", "ok"}, {"path", out.string()}, {"clips", opts.clips}};
}

Json cmd_degrade(const Context& ctx) {
  const fs::path in = ctx.path("in", "data/hq");
  const fs::path out = ctx.path("out", "data/lq");
  DegradationRanges ranges = ctx.config.degradation;
  if (ctx.has("rho")) ranges.rho = parse_interval(ctx.str("rho", ""));
  if (ctx.has("b")) ranges.b = parse_interval(ctx.str("b", ""));
  if (ctx.has("sigma")) ranges.sigma = parse_interval(ctx.str("sigma", ""));
  if (ctx.has("w")) ranges.w = parse_interval(ctx.str("w", ""));
  ranges.validate();
  const bool per_clip = ctx.flag("per_frame") ? false : ctx.config.per_clip_params;
  const std::uint64_t seed = ctx.config.seed;
  const auto clips = clip_dirs(in);

  const Json spec = {{"rho", {ranges.rho.lo, ranges.rho.hi}},
                     {"b", {ranges.b.lo, ranges.b.hi}},
                     {"sigma", {ranges.sigma.lo, ranges.sigma.hi}},
                     {"w", {ranges.w.lo, ranges.w.hi}},
                     {"jitter", {ranges.rho_jitter, ranges.b_jitter, ranges.sigma_jitter, ranges.w_jitter}},
                     {"per_clip_params", per_clip},
                     {"seed", seed},
                     {"input", rel(ctx, in)}};
  const std::string digest = digest_hex(spec.dump());
  if (up_to_date(ctx, out, "degrade", digest)) return skipped(out);

  fs::create_directories(out);
  std::ostringstream csv;
  csv << "clip_id,hq_dir,lq_dir,seed,rho,b,sigma,w\n";
  Json params = Json::array();
  for (size_t i = 0; i < clips.size(); ++i) {
    const auto& [id, dir] = clips[i];
    const VideoClip hq = load_clip(dir);
    DegradationRanges r = ranges;
    r.seed = derive_seed(seed, i);
    const DegradedClip lq = degrade_clip(hq, r, per_clip);
    const fs::path lq_dir = out / id;
    if (fs::exists(lq_dir))
      for (const auto& old : list_frame_files(lq_dir)) fs::remove(old);
    save_clip(lq.clip, lq_dir);
    char row[512];
    std::snprintf(row, sizeof row, "%s,%s,%s,%llu,%.6f,%.6f,%.6f,%d\n", id.c_str(), rel(ctx, dir).c_str(),
                  rel(ctx, lq_dir).c_str(), static_cast<unsigned long long>(r.seed), lq.params.blur_sigma,
                  lq.params.down_factor, lq.params.noise_sigma, lq.params.jpeg_quality);
    csv << row;
    params.push_back({{"clip_id", id}, {"seed", r.seed}, {"params", params_digest(lq.params)}});
  }
  {
    std::ofstream os(out / "clips.csv");
    os << csv.str();
    if (!os) fail(ErrorCode::kIo, "cannot write " + (out / "clips.csv").string());
  }
  RunManifest m = start_manifest(ctx, "degrade", out.filename().string(), digest);
  m.inputs = {{"hq", rel(ctx, in)}};
  m.outputs = {{"clips", params}, {"clip_manifest", "clips.csv"}};
  m.extra = {{"jpeg_codec", jpeg_codec_identity()}, {"ranges", spec}};
  if (read_manifest(in)) m.lineage.push_back(lineage_of(ctx.workdir, in));
  m.complete = true;
  write_manifest(m, out);
  log_line("degrade: wrote " + std::to_string(clips.size()) + " clips to " + out.string());
  return {{"status", "ok"}, {"path", out.string()}, {"clips", clips.size()}};
}

Json cmd_pretrain_codec(const Context& ctx) {
  const fs::path hq_root = ctx.path("hq", "data/hq");
  const std::string run_id = ctx.str("run_id", "codec");
  const fs::path run = ctx.workdir / "runs" / run_id;
  PipelineConfig cfg = ctx.config;
  if (ctx.has("steps")) cfg.codec_training.steps = static_cast<int>(ctx.integer("steps", 0));
  const std::string digest = digest_hex(
      section_digest(cfg, {"seed", "codec", "codec_training"}) + "|" + rel(ctx, hq_root));
  if (up_to_date(ctx, run, "pretrain-codec", digest)) return skipped(run);
  PipelineConfig key_cfg = cfg;
  key_cfg.codec_training.steps = 0;
  key_cfg.codec_ckpt_every = 0;
  const std::string resume_key =
      digest_hex(section_digest(key_cfg, {"seed", "codec", "codec_training"}) + "|" + rel(ctx, hq_root));

  const auto windows = load_clip_windows(hq_root, cfg.codec.clip_frames, false);
  if (windows.empty()) fail(ErrorCode::kInvalidArgument, "no complete clip windows under " + hq_root.string());
  std::vector<const VideoClip*> data;
  for (const auto& w : windows) data.push_back(&w.clip);

  VqCodec codec(cfg.codec);
  CodecTrainer trainer(codec, cfg.codec_training);
  fs::create_directories(run);
  const fs::path log_path = run / "train_log.jsonl";
  std::int64_t resumed = 0;
  if (!ctx.force) {
    const fs::path last = latest_step_checkpoint(run, &resumed);
    if (!last.empty()) {
      const Checkpoint ckpt = load_checkpoint(last);
      if (ckpt.config_digest == resume_key && resumed <= cfg.codec_training.steps) {
        ckpt.load_params(codec.all_params());
        trainer.load_state(ckpt);
        truncate_log(log_path, resumed);
        log_line("pretrain-codec: resuming from " + last.string());
      } else {
        resumed = 0;
      }
    } else {
      resumed = 0;
    }
  }
  if (resumed <= 0) {
    remove_step_checkpoints(run);
    std::ofstream(log_path, std::ios::trunc);
  }
  std::ofstream log(log_path, std::ios::app);

  const Json cfg_doc = {{"codec", codec_config_to_json(cfg.codec)}, {"codec_training", config_to_json(cfg)["codec_training"]}};
  auto snapshot = [&](std::int64_t steps) {
    Checkpoint ckpt;
    ckpt.config_json = cfg_doc.dump();
    ckpt.config_digest = resume_key;
    ckpt.step_count = static_cast<std::uint64_t>(steps);
    ckpt.add_params(codec.all_params());
    trainer.save_state(ckpt);
    return ckpt;
  };

  const auto t0 = std::chrono::steady_clock::now();
  CodecLossRecord rec;
  for (std::int64_t s = trainer.step_count(); s < cfg.codec_training.steps; ++s) {
    Rng batch_rng(derive_seed(cfg.codec_training.seed, 1000 + static_cast<std::uint64_t>(s)));
    std::vector<const VideoClip*> batch;
    for (int i : sample_batch(batch_rng, static_cast<int>(data.size()), cfg.codec_training.batch_size))
      batch.push_back(data[static_cast<size_t>(i)]);
    rec = trainer.step(batch);
    append_jsonl(log, {{"step", rec.step},
                       {"recon_l1", rec.recon_l1},
                       {"perceptual", rec.perceptual},
                       {"codebook", rec.codebook},
                       {"commitment", rec.commitment},
                       {"total", rec.total},
                       {"codes_used", rec.codes_used},
                       {"lr", cfg.codec_training.lr},
                       {"seed", cfg.seed}});
    if (cfg.codec_ckpt_every > 0 && rec.step % cfg.codec_ckpt_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "step_%lld.ckpt", static_cast<long long>(rec.step));
      save_checkpoint(snapshot(rec.step), run / name);
    }
    if (rec.step % 50 == 0 || rec.step == cfg.codec_training.steps)
      log_line("pretrain-codec: step " + std::to_string(rec.step) + " recon_l1 " + std::to_string(rec.recon_l1) +
               " codes " + std::to_string(rec.codes_used));
  }
  save_checkpoint(snapshot(trainer.step_count()), codec_checkpoint_path(run));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunManifest m = start_manifest(ctx, "pretrain-codec", run_id, digest);
  m.inputs = {{"hq", rel(ctx, hq_root)}};
  m.outputs = {{"checkpoint", "codec.ckpt"}, {"log", "train_log.jsonl"}, {"steps", trainer.step_count()}};
  m.extra = {{"seconds", seconds}, {"windows", windows.size()}};
  if (read_manifest(hq_root)) m.lineage.push_back(lineage_of(ctx.workdir, hq_root));
  m.complete = true;
  write_manifest(m, run);
  return {{"status", "ok"}, {"path", run.string()}, {"steps", trainer.step_count()}, {"recon_l1", rec.recon_l1}};
}

Json cmd_build_motion_bank(const Context& ctx) {
  const fs::path hq_root = ctx.path("hq", "data/hq");
  const fs::path codec_run = ctx.path("codec", "runs/codec");
  const fs::path out = ctx.path("out", "banks/motion");
  const PipelineConfig& cfg = ctx.config;
  const std::string upstream = manifest_digest(codec_run);
  const std::string digest =
      digest_hex(section_digest(cfg, {"seed", "motion"}) + "|" + upstream + "|" + rel(ctx, hq_root));
  const VqCodec codec = load_codec(codec_run);
  if (up_to_date(ctx, out, "build-motion-bank", digest)) return skipped(out);

  const auto windows = load_clip_windows(hq_root, codec.config().clip_frames, false);
  std::vector<FeatureGrid> features;
  for (const auto& w : windows) features.push_back(quantize(encode(w.clip, codec), codec.vision_bank()).second);
  const std::uint64_t seed = derive_seed(cfg.seed, 4);
  const MotionStatsBank bank = build_motion_bank(features, cfg.motion.bank_size, seed, cfg.motion.kmeans_iters);
  MotionBankInfo info{static_cast<int>(windows.size()), seed, cfg.motion.kmeans_iters};
  save_motion_bank(bank, info, out / "motion.bin");

  RunManifest m = start_manifest(ctx, "build-motion-bank", out.filename().string(), digest);
  m.inputs = {{"hq", rel(ctx, hq_root)}, {"codec", rel(ctx, codec_run)}};
  m.outputs = {{"bank", "motion.bin"}, {"entries", bank.size()}, {"frames", bank.frames}};
  m.lineage.push_back(lineage_of(ctx.workdir, codec_run));
  m.complete = true;
  write_manifest(m, out);
  log_line("build-motion-bank: " + std::to_string(bank.size()) + " entries from " + std::to_string(windows.size()) +
           " clips");
  return {{"status", "ok"}, {"path", out.string()}, {"entries", bank.size()}};
}

Json cmd_train(const Context& ctx) {
  const fs::path lq_root = ctx.path("lq", "data/lq");
  const fs::path hq_root = ctx.path("hq", "data/hq");
  const fs::path codec_run = ctx.path("codec", "runs/codec");
  const fs::path bank_dir = ctx.path("motion_bank", "banks/motion");
  const std::string run_id = ctx.str("run_id", "main");
  const fs::path run = ctx.workdir / "runs" / run_id;
  PipelineConfig cfg = ctx.config;
  if (ctx.has("iterations")) cfg.training.iterations = static_cast<int>(ctx.integer("iterations", 0));

  const VqCodec frozen = load_codec(codec_run);
  std::optional<MotionStatsBank> bank;
  if (cfg.motion.enabled) {
    if (!fs::exists(bank_dir / "motion.bin"))
      fail(ErrorCode::kMissingPrerequisite, "missing prerequisite: motion bank " + (bank_dir / "motion.bin").string() +
                                                " not found (run build-motion-bank first)");
    bank = load_motion_bank(bank_dir / "motion.bin");
  }
  const std::string digest = digest_hex(section_digest(cfg, {"seed", "predictor", "motion", "training"}) + "|" +
                                        manifest_digest(codec_run) + "|" + manifest_digest(bank_dir) + "|" +
                                        rel(ctx, lq_root) + "|" + rel(ctx, hq_root));
  if (up_to_date(ctx, run, "train", digest)) return skipped(run);
  PipelineConfig key_cfg = cfg;
  key_cfg.training.iterations = 0;
  key_cfg.training.ckpt_every = 0;
  const std::string resume_key = digest_hex(section_digest(key_cfg, {"seed", "predictor", "motion", "training"}) +
                                            "|" + manifest_digest(codec_run) + "|" + manifest_digest(bank_dir) + "|" +
                                            rel(ctx, lq_root) + "|" + rel(ctx, hq_root));

  const int frames = frozen.config().clip_frames;
  const auto lq = load_clip_windows(lq_root, frames, false);
  const auto hq = load_clip_windows(hq_root, frames, false);
  std::map<std::pair<std::string, int>, const ClipWindow*> hq_index;
  for (const auto& w : hq) hq_index[{w.clip_id, w.window}] = &w;
  std::vector<const ClipWindow*> lq_used, hq_used;
  for (const auto& w : lq)
    if (auto it = hq_index.find({w.clip_id, w.window}); it != hq_index.end()) {
      lq_used.push_back(&w);
      hq_used.push_back(it->second);
    }
  if (lq_used.empty()) fail(ErrorCode::kInvalidArgument, "no LQ/HQ clip pairs with matching ids");
  const int height = hq_used.front()->clip.height(), width = hq_used.front()->clip.width();

  RestorationConfig rcfg;
  rcfg.codec = frozen.config();
  rcfg.predictor = cfg.predictor;
  rcfg.motion = cfg.motion;
  rcfg.derive_geometry(height, width);
  RestorationModel model(rcfg, frozen);
  if (bank) model.set_motion_bank(*bank);

  std::vector<IndexGrid> gt;
  for (const auto* w : hq_used) gt.push_back(derive_gt_codes(w->clip, frozen));
  std::vector<TrainingPair> pairs;
  for (size_t i = 0; i < lq_used.size(); ++i) pairs.push_back({&lq_used[i]->clip, &hq_used[i]->clip, &gt[i]});

  TrainConfig tcfg = cfg.training;
  tcfg.clip_frames = frames;
  RestorationTrainer trainer(model, tcfg);
  fs::create_directories(run);
  const fs::path log_path = run / "train_log.jsonl";
  const Json meta = {{"image", {height, width}}, {"training", config_to_json(cfg)["training"]}};
  std::int64_t resumed = 0;
  if (!ctx.force) {
    const fs::path last = latest_step_checkpoint(run, &resumed);
    const Checkpoint ckpt = last.empty() ? Checkpoint{} : load_checkpoint(last);
    if (!last.empty()) {
      const Json doc = Json::parse(ckpt.config_json, nullptr, false);
      if (!doc.is_discarded() && doc.value("resume_key", "") == resume_key && resumed <= tcfg.iterations) {
        ckpt.load_params(model.all_params());
        trainer.load_state(ckpt);
        truncate_log(log_path, resumed);
        log_line("train: resuming from " + last.string());
      } else {
        resumed = 0;
      }
    } else {
      resumed = 0;
    }
  }
  if (resumed <= 0) {
    remove_step_checkpoints(run);
    std::ofstream(log_path, std::ios::trunc);
  }
  std::ofstream log(log_path, std::ios::app);

  Json ckpt_meta = meta;
  ckpt_meta["resume_key"] = resume_key;
  auto snapshot = [&](std::int64_t steps, bool with_state) {
    Checkpoint ckpt = model_checkpoint(model, ckpt_meta, static_cast<std::uint64_t>(steps));
    if (with_state) trainer.save_state(ckpt);
    return ckpt;
  };

  const auto t0 = std::chrono::steady_clock::now();
  LossRecord rec;
  for (std::int64_t s = trainer.step_count(); s < tcfg.iterations; ++s) {
    Rng batch_rng(derive_seed(tcfg.seed, 5000 + static_cast<std::uint64_t>(s)));
    std::vector<TrainingPair> batch;
    for (int i : sample_batch(batch_rng, static_cast<int>(pairs.size()), tcfg.batch_size))
      batch.push_back(pairs[static_cast<size_t>(i)]);
    rec = trainer.step(batch);
    append_jsonl(log, {{"step", rec.step},
                       {"consi", rec.consi},
                       {"adv_g", rec.adv_g},
                       {"adv_d", rec.adv_d},
                       {"bank", rec.bank},
                       {"lr", tcfg.lr},
                       {"seed", tcfg.seed}});
    if (tcfg.ckpt_every > 0 && rec.step % tcfg.ckpt_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "step_%lld.ckpt", static_cast<long long>(rec.step));
      save_checkpoint(snapshot(rec.step, true), run / name);
    }
    if (rec.step % 50 == 0 || rec.step == tcfg.iterations)
      log_line("train: step " + std::to_string(rec.step) + " consi " + std::to_string(rec.consi) + " bank " +
               std::to_string(rec.bank) + " adv_d " + std::to_string(rec.adv_d));
  }
  save_checkpoint(snapshot(trainer.step_count(), true), model_checkpoint_path(run));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunManifest m = start_manifest(ctx, "train", run_id, digest);
  m.inputs = {{"lq", rel(ctx, lq_root)}, {"hq", rel(ctx, hq_root)}, {"codec", rel(ctx, codec_run)}};
  if (bank) m.inputs["motion_bank"] = rel(ctx, bank_dir);
  m.outputs = {{"checkpoint", "model.ckpt"}, {"log", "train_log.jsonl"}, {"steps", trainer.step_count()}};
  m.extra = {{"seconds", seconds}, {"pairs", pairs.size()}};
  m.lineage.push_back(lineage_of(ctx.workdir, codec_run));
  if (bank) m.lineage.push_back(lineage_of(ctx.workdir, bank_dir));
  if (read_manifest(lq_root)) m.lineage.push_back(lineage_of(ctx.workdir, lq_root));
  m.complete = true;
  write_manifest(m, run);
  return {{"status", "ok"}, {"path", run.string()}, {"steps", trainer.step_count()}, {"consi", rec.consi},
          {"bank", rec.bank}};
}

Json cmd_restore(const Context& ctx) {
  const fs::path in = ctx.path("in", "data/lq");
  const fs::path model_run = ctx.path("model", "runs/main");
  const fs::path out = ctx.path("out", "restored/main");
  const LoadedModel loaded = load_model(model_run);
  const RestorationModel& model = *loaded.model;
  const bool use_motion = ctx.has("motion") ? ctx.flag("motion") : model.motion_ready();
  const std::string digest = digest_hex(manifest_digest(model_run) + "|" + rel(ctx, in) + "|" +
                                        (use_motion ? "motion" : "content_only"));
  if (up_to_date(ctx, out, "restore", digest)) return skipped(out);

  const int frames = model.config().codec.clip_frames;
  const auto clips = clip_dirs(in);
  Json restored_ids = Json::array();
  for (const auto& [id, dir] : clips) {
    const VideoClip lq = load_clip(dir);
    const int total = lq.frame_count();
    Tensor result;
    for (int start = 0; start < total; start += frames) {
      Tensor window(Shape{frames, lq.channels(), lq.height(), lq.width()});
      for (int f = 0; f < frames; ++f) {
        const int src = std::min(start + f, total - 1);
        std::copy_n(lq.frames.data() + src * lq.frame_size(), lq.frame_size(), window.data() + f * lq.frame_size());
      }
      const VideoClip restored = model.restore(VideoClip(std::move(window)), use_motion);
      const std::int64_t fsz = restored.frame_size();
      if (result.numel() == 0)
        result = Tensor(Shape{total, restored.channels(), restored.height(), restored.width()});
      for (int f = 0; f < frames && start + f < total; ++f)
        std::copy_n(restored.frames.data() + f * fsz, fsz, result.data() + (start + f) * fsz);
    }
    const fs::path target = out / id;
    if (fs::exists(target))
      for (const auto& old : list_frame_files(target)) fs::remove(old);
    save_clip(VideoClip(std::move(result), lq.frame_rate), target);
    restored_ids.push_back(id);
  }
  RunManifest m = start_manifest(ctx, "restore", out.filename().string(), digest);
  m.inputs = {{"lq", rel(ctx, in)}, {"model", rel(ctx, model_run)}};
  m.outputs = {{"clips", restored_ids}, {"window", frames}, {"stride", frames}, {"motion", use_motion}};
  m.lineage.push_back(lineage_of(ctx.workdir, model_run));
  m.complete = true;
  write_manifest(m, out);
  log_line("restore: wrote " + std::to_string(clips.size()) + " clips to " + out.string());
  return {{"status", "ok"}, {"path", out.string()}, {"clips", clips.size()}};
}

Json cmd_eval(const Context& ctx) {
  const fs::path restored = ctx.path("restored", "restored/main");
  const fs::path reference = ctx.path("reference", "data/hq");
  const fs::path out = ctx.path("out", "reports/main");
  EvalOptions opts = ctx.config.eval;
  opts.config_digest = section_digest(ctx.config, {"eval"});
  const std::string digest =
      digest_hex(opts.config_digest + "|" + manifest_digest(restored) + "|" + rel(ctx, reference) + "|" + rel(ctx, restored));
  if (up_to_date(ctx, out, "eval", digest)) return skipped(out);
  const MetricReport report = evaluate_set(restored, reference, opts);
  write_report(report, out);
  RunManifest m = start_manifest(ctx, "eval", out.filename().string(), digest);
  m.inputs = {{"restored", rel(ctx, restored)}, {"reference", rel(ctx, reference)}};
  m.outputs = {{"report", "report.json"}, {"table", "report.csv"}, {"traces", "traces"}};
  if (read_manifest(restored)) m.lineage.push_back(lineage_of(ctx.workdir, restored));
  m.complete = true;
  write_manifest(m, out);
  Json summary = {{"status", "ok"},
                  {"path", out.string()},
                  {"clips", report.clips.size()},
                  {"psnr", std::isfinite(report.mean_psnr) ? Json(report.mean_psnr) : Json(nullptr)},
                  {"ifd", report.mean_ifd},
                  {"perceptual", report.mean_perceptual}};
  log_line("eval: " + std::to_string(report.clips.size()) + " clips, psnr " + std::to_string(report.mean_psnr) +
           " ifd " + std::to_string(report.mean_ifd));
  return summary;
}

Json cmd_export_attention(const Context& ctx) {
  const fs::path in = ctx.path("in", "data/lq");
  const fs::path model_run = ctx.path("model", "runs/main");
  const fs::path out_root = ctx.path("out", "attn");
  const LoadedModel loaded = load_model(model_run);
  const RestorationModel& model = *loaded.model;
  const auto clips = clip_dirs(in);
  const std::string clip_id = ctx.str("clip", clips.front().first);
  const auto it = std::find_if(clips.begin(), clips.end(), [&](const auto& c) { return c.first == clip_id; });
  if (it == clips.end()) fail(ErrorCode::kIo, "clip '" + clip_id + "' not found under " + in.string());
  const AttentionMode mode = ctx.has("mode") ? parse_attention_mode(ctx.str("mode", "")) : model.predictor().config().mode;

  const auto& pc = model.predictor().config();
  std::array<int, 3> q{0, pc.height / 2, pc.width / 2};
  if (ctx.has("position")) {
    const std::string pos = ctx.str("position", "");
    if (std::sscanf(pos.c_str(), "%d,%d,%d", &q[0], &q[1], &q[2]) != 3)
      fail(ErrorCode::kConfig, "position must be f,h,w");
  }
  const VideoClip clip = load_clip(it->second, model.config().codec.clip_frames);
  const FeatureGrid z = encode(clip, model.codec());
  const auto maps = export_attention_maps(z, model.predictor(), q, mode);

  char sub[64];
  std::snprintf(sub, sizeof sub, "%d_%d_%d", q[0], q[1], q[2]);
  const fs::path dir = out_root / clip_id / sub;
  fs::create_directories(dir);
  double peak = 0.0, total = 0.0;
  for (const auto& m : maps)
    for (Real v : m.values()) {
      peak = std::max(peak, static_cast<double>(v));
      total += v;
    }
  std::ofstream csv(dir / "weights.csv");
  csv << "frame,y,x,weight\n";
  for (size_t k = 0; k < maps.size(); ++k) {
    const Tensor& m = maps[k];
    Image8 img{m.dim(1), m.dim(0), 1, std::vector<std::uint8_t>(static_cast<size_t>(m.numel()))};
    for (std::int64_t i = 0; i < m.numel(); ++i) {
      img.pixels[static_cast<size_t>(i)] =
          static_cast<std::uint8_t>(std::lround(peak > 0 ? 255.0 * m[i] / peak : 0.0));
      char line[96];
      std::snprintf(line, sizeof line, "%zu,%lld,%lld,%.9g\n", k, static_cast<long long>(i / m.dim(1)),
                    static_cast<long long>(i % m.dim(1)), static_cast<double>(m[i]));
      csv << line;
    }
    write_png(dir / ("frame" + std::to_string(k) + ".png"), img);
  }
  if (!csv) fail(ErrorCode::kIo, "cannot write attention weights under " + dir.string());
  RunManifest man = start_manifest(ctx, "export-attention", clip_id, digest_hex(manifest_digest(model_run) + sub));
  man.inputs = {{"lq", rel(ctx, it->second)}, {"model", rel(ctx, model_run)}};
  man.outputs = {{"frames", maps.size()}, {"query", {q[0], q[1], q[2]}}, {"mode", to_string(mode)}, {"mass", total}};
  man.lineage.push_back(lineage_of(ctx.workdir, model_run));
  man.complete = true;
  write_manifest(man, dir);
  return {{"status", "ok"}, {"path", dir.string()}, {"frames", maps.size()}, {"mass", total}};
}

Json cmd_verify(const Context& ctx) {
  const fs::path dir = ctx.path("path", "reports/main");
  const auto m = read_manifest(dir);
  if (!m) fail(ErrorCode::kMissingPrerequisite, "missing prerequisite: no manifest in " + dir.string());
  const auto problems = verify_lineage(ctx.workdir, dir);
  if (!problems.empty()) {
    std::string msg = "lineage check failed:";
    for (const auto& p : problems) msg += "\n  " + p;
    fail(ErrorCode::kConfig, msg);
  }
  Json chain = Json::array();
  std::set<std::string> seen;
  std::function<void(const fs::path&)> walk = [&](const fs::path& d) {
    if (!seen.insert(fs::weakly_canonical(d).string()).second) return;
    const auto man = read_manifest(d);
    chain.push_back({{"command", man->command}, {"path", rel(ctx, d)}, {"complete", man->complete}});
    for (const auto& l : man->lineage) walk(fs::path(l.path).is_absolute() ? fs::path(l.path) : ctx.workdir / l.path);
  };
  walk(dir);
  return {{"status", "ok"}, {"path", dir.string()}, {"artifacts", chain}};
}

}  // namespace

std::unique_ptr<RestorationModel> load_restoration_model(const fs::path& run_dir) {
  return load_model(run_dir).model;
}

void set_log_sink(LogSink s) { sink() = std::move(s); }

void log_line(const std::string& line) {
  if (sink()) sink()(line);
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"toy-data", "degrade", "pretrain-codec", "build-motion-bank",
                                                 "train",    "restore", "eval",           "export-attention", "verify"};
  return names;
}

Json run_command(const std::string& command, const Json& args) {
  try {
    const Context ctx = make_context(args);
    if (command == "toy-data") return cmd_toy_data(ctx);
    if (command == "degrade") return cmd_degrade(ctx);
    if (command == "pretrain-codec") return cmd_pretrain_codec(ctx);
    if (command == "build-motion-bank") return cmd_build_motion_bank(ctx);
    if (command == "train") return cmd_train(ctx);
    if (command == "restore") return cmd_restore(ctx);
    if (command == "eval") return cmd_eval(ctx);
    if (command == "export-attention") return cmd_export_attention(ctx);
    if (command == "verify") return cmd_verify(ctx);
  } catch (const fs::filesystem_error& e) {
    fail(ErrorCode::kIo, e.what());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  fail(ErrorCode::kConfig, "unknown command '" + command + "'");
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo:
      return 2;
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidArgument:
      return 3;
    case ErrorCode::kMissingPrerequisite:
      return 4;
    case ErrorCode::kNumeric:
      return 5;
    case ErrorCode::kInternal:
      return 1;
  }
  return 1;
}

std::vector<ClipWindow> load_clip_windows(const fs::path& root, int frames, bool pad_tail) {
  check_arg(frames >= 1, "window length must be positive");
  std::vector<ClipWindow> out;
  for (const auto& [id, dir] : clip_dirs(root)) {
    const VideoClip clip = load_clip(dir);
    const int total = clip.frame_count();
    const std::int64_t fsz = clip.frame_size();
    for (int start = 0, w = 0; start < total; start += frames, ++w) {
      const int valid = std::min(frames, total - start);
      if (valid < frames && !pad_tail) break;
      Tensor t(Shape{frames, clip.channels(), clip.height(), clip.width()});
      for (int f = 0; f < frames; ++f) {
        const int src = std::min(start + f, total - 1);
        std::copy_n(clip.frames.data() + src * fsz, fsz, t.data() + f * fsz);
      }
      out.push_back({id, w, valid, VideoClip(std::move(t), clip.frame_rate)});
    }
  }
  return out;
}

DPTC_END_NAMESPACE
