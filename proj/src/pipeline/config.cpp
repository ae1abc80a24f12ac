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

#include "pipeline/config.hpp"

#include <fstream>
#include <set>

#include "core/checkpoint.hpp"

DPTC_BEGIN_NAMESPACE

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  fail(ErrorCode::kConfig, "config key '" + key + "': " + what);
}

Json to_value(int v) { return v; }
Json to_value(bool v) { return v; }
Json to_value(double v) { return v; }
Json to_value(std::uint64_t v) { return v; }
Json to_value(const std::string& v) { return v; }
Json to_value(const std::vector<int>& v) { return v; }
Json to_value(const Interval& v) { return Json::array({v.lo, v.hi}); }
Json to_value(AttentionMode v) { return to_string(v); }
Json to_value(ModulationVariant v) { return to_string(v); }
Json to_value(GanLoss v) { return to_string(v); }

void from_value(const Json& j, int& v, const std::string& key) {
  if (!j.is_number_integer()) bad(key, "expected an integer");
  v = j.get<int>();
}
void from_value(const Json& j, bool& v, const std::string& key) {
  if (!j.is_boolean()) bad(key, "expected true or false");
  v = j.get<bool>();
}
void from_value(const Json& j, double& v, const std::string& key) {
  if (!j.is_number()) bad(key, "expected a number");
  v = j.get<double>();
}
void from_value(const Json& j, std::uint64_t& v, const std::string& key) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
    bad(key, "expected a non-negative integer");
  v = j.get<std::uint64_t>();
}
void from_value(const Json& j, std::string& v, const std::string& key) {
  if (!j.is_string()) bad(key, "expected a string");
  v = j.get<std::string>();
}
void from_value(const Json& j, std::vector<int>& v, const std::string& key) {
  if (!j.is_array()) bad(key, "expected an array of integers");
  v.clear();
  for (const auto& e : j) {
    if (!e.is_number_integer()) bad(key, "expected an array of integers");
    v.push_back(e.get<int>());
  }
}
void from_value(const Json& j, Interval& v, const std::string& key) {
  if (j.is_string()) {
    v = parse_interval(j.get<std::string>());
    return;
  }
  if (j.is_number()) {
    v = Interval{j.get<double>(), j.get<double>()};
    return;
  }
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) bad(key, "expected [lo, hi]");
  v = Interval{j[0].get<double>(), j[1].get<double>()};
}
template <typename E, typename Parse>
void from_enum(const Json& j, E& v, const std::string& key, Parse parse) {
  if (!j.is_string()) bad(key, "expected a string");
  v = parse(j.get<std::string>());
}
void from_value(const Json& j, AttentionMode& v, const std::string& key) { from_enum(j, v, key, parse_attention_mode); }
void from_value(const Json& j, ModulationVariant& v, const std::string& key) {
  from_enum(j, v, key, parse_modulation_variant);
}
void from_value(const Json& j, GanLoss& v, const std::string& key) { from_enum(j, v, key, parse_gan_loss); }

struct Writer {
  Json& out;
  template <typename T>
  void operator()(const char* key, T& value) {
    out[key] = to_value(value);
  }
};

struct Reader {
  const Json& in;
  std::string section;
  std::set<std::string> known;
  template <typename T>
  void operator()(const char* key, T& value) {
    known.insert(key);
    if (in.contains(key)) from_value(in.at(key), value, section + "." + key);
  }
  void finish() const {
    for (auto it = in.begin(); it != in.end(); ++it)
      if (!known.count(it.key())) fail(ErrorCode::kConfig, "unknown config key '" + section + "." + it.key() + "'");
  }
};

template <typename V>
void visit_toy(V& v, ToyFaceOptions& t) {
  v("clips", t.clips);
  v("frames", t.frames);
  v("size", t.size);
  v("seed", t.seed);
}

template <typename V>
void visit_degradation(V& v, PipelineConfig& c) {
  auto& d = c.degradation;
  v("rho", d.rho);
  v("b", d.b);
  v("sigma", d.sigma);
  v("w", d.w);
  v("rho_jitter", d.rho_jitter);
  v("b_jitter", d.b_jitter);
  v("sigma_jitter", d.sigma_jitter);
  v("w_jitter", d.w_jitter);
  v("per_clip_params", c.per_clip_params);
}

template <typename V>
void visit_codec(V& v, CodecConfig& c) {
  v("latent_channels", c.latent_channels);
  v("downscale", c.downscale);
  v("bank_size_vision", c.bank_size);
  v("clip_frames", c.clip_frames);
  v("commitment_beta", c.commitment_beta);
  v("image_channels", c.image_channels);
  v("encoder_channels", c.encoder_channels);
  v("generator_channels", c.generator_channels);
  v("residual_blocks", c.residual_blocks);
  v("frame_attention_blocks", c.frame_attention_blocks);
  v("frame_attention_heads", c.frame_attention_heads);
  v("ema_codebook", c.ema_codebook);
  v("ema_decay", c.ema_decay);
  v("dead_code_steps", c.dead_code_steps);
}

template <typename V>
void visit_codec_training(V& v, PipelineConfig& c) {
  auto& t = c.codec_training;
  v("steps", t.steps);
  v("batch_size", t.batch_size);
  v("lr", t.lr);
  v("perceptual_weight", t.perceptual_weight);
  v("grad_clip", t.grad_clip);
  v("data_init", t.data_init);
  v("feature_extractor", t.feature_extractor);
  v("ckpt_every", c.codec_ckpt_every);
}

template <typename V>
void visit_predictor(V& v, PredictorConfig& p) {
  v("predictor_blocks", p.blocks);
  v("d_model", p.d_model);
  v("heads", p.heads);
  v("ffn_mult", p.ffn_mult);
  v("mode", p.mode);
}

template <typename V>
void visit_motion(V& v, MotionConfig& m) {
  v("bank_size_motion", m.bank_size);
  v("modulation_variant", m.variant);
  v("epsilon", m.epsilon);
  v("fusion_blocks", m.fusion_blocks);
  v("fusion_heads", m.fusion_heads);
  v("fusion_ffn_mult", m.fusion_ffn_mult);
  v("kmeans_iters", m.kmeans_iters);
  v("enabled", m.enabled);
}

template <typename V>
void visit_training(V& v, TrainConfig& t) {
  v("lr", t.lr);
  v("disc_lr", t.disc_lr);
  v("batch_size", t.batch_size);
  v("iterations", t.iterations);
  v("lambda", t.lambda);
  v("clip_frames", t.clip_frames);
  v("beta1", t.beta1);
  v("beta2", t.beta2);
  v("gan_loss", t.gan_loss);
  v("grad_clip", t.grad_clip);
  v("ckpt_every", t.ckpt_every);
  v("feature_extractor", t.feature_extractor);
  v("disc_channels", t.discriminator.channels);
}

template <typename V>
void visit_eval(V& v, EvalOptions& e) {
  v("feature_extractor", e.feature_extractor);
  v("frechet", e.frechet);
}

template <typename Fn>
void read_section(const Json& doc, const char* name, Fn fn) {
  if (!doc.contains(name)) return;
  const Json& sec = doc.at(name);
  if (!sec.is_object()) fail(ErrorCode::kConfig, std::string("config section '") + name + "' must be an object");
  Reader r{sec, name, {}};
  fn(r);
  r.finish();
}

}  // namespace

void PipelineConfig::propagate_seed() {
  degradation.seed = seed;
  codec.seed = derive_seed(seed, 1);
  codec_training.seed = derive_seed(seed, 2);
  predictor.seed = derive_seed(seed, 3);
  training.seed = seed;
}

PipelineConfig default_config() {
  PipelineConfig c;
  c.codec.bank_size = 1024;
  c.predictor.d_model = 256;
  c.predictor.heads = 8;
  c.predictor.blocks = 6;
  c.motion.bank_size = 16384;
  c.propagate_seed();
  return c;
}

PipelineConfig toy_config() {
  PipelineConfig c;
  c.degradation.rho = {1.0, 3.0};
  c.degradation.b = {2.0, 4.0};
  c.degradation.sigma = {0.0, 10.0};
  c.degradation.w = {50.0, 100.0};
  c.codec.latent_channels = 32;
  c.codec.downscale = 8;
  c.codec.bank_size = 256;
  c.codec.encoder_channels = {16, 32, 64, 64};
  c.codec.generator_channels = {16, 32, 64, 64};
  c.codec.residual_blocks = 2;
  c.codec.frame_attention_blocks = 1;
  c.codec.frame_attention_heads = 4;
  c.codec.dead_code_steps = 200;
  c.codec_training.steps = 2000;
  c.codec_training.batch_size = 2;
  c.codec_training.lr = 2e-3;
  c.predictor.blocks = 2;
  c.predictor.d_model = 64;
  c.predictor.heads = 4;
  c.predictor.ffn_mult = 2;
  c.motion.bank_size = 64;
  c.motion.fusion_blocks = 2;
  c.motion.fusion_heads = 4;
  c.training.lr = 5e-4;
  c.training.batch_size = 2;
  c.training.iterations = 2000;
  c.training.ckpt_every = 500;
  c.propagate_seed();
  return c;
}

Json codec_config_to_json(const CodecConfig& cfg) {
  Json j = Json::object();
  CodecConfig c = cfg;
  Writer w{j};
  visit_codec(w, c);
  j["seed"] = cfg.seed;
  return j;
}

CodecConfig codec_config_from_json(const Json& doc, CodecConfig base) {
  Reader r{doc, "codec", {}};
  visit_codec(r, base);
  r.known.insert("seed");
  if (doc.contains("seed")) from_value(doc.at("seed"), base.seed, "codec.seed");
  r.finish();
  base.validate();
  return base;
}

Json restoration_config_to_json(const RestorationConfig& cfg) {
  RestorationConfig c = cfg;
  Json j;
  j["codec"] = codec_config_to_json(cfg.codec);
  Json p = Json::object(), m = Json::object();
  Writer wp{p}, wm{m};
  visit_predictor(wp, c.predictor);
  p["frames"] = c.predictor.frames;
  p["height"] = c.predictor.height;
  p["width"] = c.predictor.width;
  p["latent_channels"] = c.predictor.latent_channels;
  p["bank_size"] = c.predictor.bank_size;
  p["seed"] = c.predictor.seed;
  visit_motion(wm, c.motion);
  j["predictor"] = p;
  j["motion"] = m;
  return j;
}

RestorationConfig restoration_config_from_json(const Json& doc) {
  RestorationConfig c;
  c.codec = codec_config_from_json(doc.at("codec"));
  const Json& p = doc.at("predictor");
  Reader rp{p, "predictor", {}};
  visit_predictor(rp, c.predictor);
  for (const char* key : {"frames", "height", "width", "latent_channels", "bank_size"}) rp.known.insert(key);
  rp.known.insert("seed");
  from_value(p.at("frames"), c.predictor.frames, "predictor.frames");
  from_value(p.at("height"), c.predictor.height, "predictor.height");
  from_value(p.at("width"), c.predictor.width, "predictor.width");
  from_value(p.at("latent_channels"), c.predictor.latent_channels, "predictor.latent_channels");
  from_value(p.at("bank_size"), c.predictor.bank_size, "predictor.bank_size");
  from_value(p.at("seed"), c.predictor.seed, "predictor.seed");
  rp.finish();
  Reader rm{doc.at("motion"), "motion", {}};
  visit_motion(rm, c.motion);
  rm.finish();
  c.validate();
  return c;
}

Json config_to_json(const PipelineConfig& cfg) {
  PipelineConfig c = cfg;
  Json doc;
  doc["seed"] = c.seed;
  auto section = [&](const char* name, auto fn) {
    Json j = Json::object();
    Writer w{j};
    fn(w);
    doc[name] = j;
  };
  section("toy_data", [&](Writer& w) { visit_toy(w, c.toy); });
  section("degradation", [&](Writer& w) { visit_degradation(w, c); });
  section("codec", [&](Writer& w) { visit_codec(w, c.codec); });
  section("codec_training", [&](Writer& w) { visit_codec_training(w, c); });
  section("predictor", [&](Writer& w) { visit_predictor(w, c.predictor); });
  section("motion", [&](Writer& w) { visit_motion(w, c.motion); });
  section("training", [&](Writer& w) { visit_training(w, c.training); });
  section("eval", [&](Writer& w) { visit_eval(w, c.eval); });
  return doc;
}

PipelineConfig config_from_json(const Json& doc, PipelineConfig c) {
  if (!doc.is_object()) fail(ErrorCode::kConfig, "config document must be a JSON object");
  static const std::set<std::string> sections = {"seed",      "preset",   "toy_data", "degradation", "codec",
                                                 "codec_training", "predictor", "motion", "training", "eval"};
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!sections.count(it.key())) fail(ErrorCode::kConfig, "unknown config section '" + it.key() + "'");
  if (doc.contains("seed")) from_value(doc.at("seed"), c.seed, "seed");
  c.propagate_seed();
  read_section(doc, "toy_data", [&](Reader& r) { visit_toy(r, c.toy); });
  read_section(doc, "degradation", [&](Reader& r) { visit_degradation(r, c); });
  read_section(doc, "codec", [&](Reader& r) { visit_codec(r, c.codec); });
  read_section(doc, "codec_training", [&](Reader& r) { visit_codec_training(r, c); });
  read_section(doc, "predictor", [&](Reader& r) { visit_predictor(r, c.predictor); });
  read_section(doc, "motion", [&](Reader& r) { visit_motion(r, c.motion); });
  read_section(doc, "training", [&](Reader& r) { visit_training(r, c.training); });
  const bool own_frames = doc.contains("training") && doc.at("training").contains("clip_frames");
  if (!own_frames) c.training.clip_frames = c.codec.clip_frames;
  read_section(doc, "eval", [&](Reader& r) { visit_eval(r, c.eval); });
  c.degradation.validate();
  c.codec.validate();
  c.codec_training.validate();
  c.training.validate();
  if (c.training.clip_frames != c.codec.clip_frames)
    fail(ErrorCode::kConfig, "training.clip_frames must equal codec.clip_frames");
  return c;
}

PipelineConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::kIo, "cannot open config file " + path.string());
  Json doc = Json::parse(is, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::kConfig, "config file " + path.string() + " is not valid JSON");
  std::string preset = "default";
  if (doc.contains("preset")) from_value(doc.at("preset"), preset, "preset");
  if (preset != "default" && preset != "toy") fail(ErrorCode::kConfig, "unknown preset '" + preset + "'");
  return config_from_json(doc, preset == "toy" ? toy_config() : default_config());
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorCode::kConfig, "override '" + assignment + "' must be key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  Json* node = &doc;
  size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) fail(ErrorCode::kConfig, "override key '" + key + "' is malformed");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = Json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

std::string section_digest(const PipelineConfig& cfg, const std::vector<std::string>& sections) {
  const Json doc = config_to_json(cfg);
  Json subset = Json::object();
  for (const auto& s : sections)
    if (doc.contains(s)) subset[s] = doc.at(s);
  return digest_hex(subset.dump());
}

Interval parse_interval(const std::string& text) {
  const auto colon = text.find(':');
  try {
    size_t used = 0;
    if (colon == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return {v, v};
    }
    const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
    const double lo = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(text);
    const double hi = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(text);
    return {lo, hi};
  } catch (const std::logic_error&) {
    fail(ErrorCode::kConfig, "cannot parse interval '" + text + "' (expected a:b)");
  }
}

DPTC_END_NAMESPACE
