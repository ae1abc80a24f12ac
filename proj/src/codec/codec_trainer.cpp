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

#include "codec/codec_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

DPTC_BEGIN_NAMESPACE

void CodecTrainOptions::validate() const {
  if (steps < 0) fail(ErrorCode::kConfig, "codec steps must be non-negative");
  if (batch_size < 1) fail(ErrorCode::kConfig, "codec batch_size must be at least 1");
  if (!(lr > 0)) fail(ErrorCode::kConfig, "codec lr must be positive");
  if (perceptual_weight < 0) fail(ErrorCode::kConfig, "perceptual_weight must be non-negative");
}

std::vector<int> sample_batch(Rng& rng, int n, int batch_size) {
  check_arg(n >= 1, "sample_batch: empty dataset");
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> out;
  while (static_cast<int>(out.size()) < batch_size) {
    for (int i = n - 1; i > 0; --i)
      std::swap(order[static_cast<size_t>(i)], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    for (int idx : order) {
      if (static_cast<int>(out.size()) == batch_size) break;
      out.push_back(idx);
    }
  }
  return out;
}

CodecForward codec_forward(const VqCodec& codec, const Var& frames, int frames_per_clip) {
  const auto& cfg = codec.config();
  CodecForward out;
  out.latents = codec.encoder().forward(frames);
  const Shape& zs = out.latents->shape();
  const Var tokens = grid_to_tokens(out.latents);
  out.codes = nearest_codes(tokens->value, codec.bank()->value);
  const Var entries = ops::gather_rows(codec.bank(), out.codes);
  if (!cfg.ema_codebook) out.codebook_loss = ops::mse_loss(ops::detach(tokens), entries);
  out.commitment_loss = ops::scale(ops::mse_loss(tokens, ops::detach(entries)), static_cast<Real>(cfg.commitment_beta));
  const Var quantized = tokens_to_grid(ops::straight_through(tokens, entries), zs[0], zs[2], zs[3]);
  out.reconstruction = codec.generator().forward(quantized, frames_per_clip);
  return out;
}

CodecTrainer::CodecTrainer(VqCodec& codec, CodecTrainOptions options)
    : codec_(codec),
      options_(std::move(options)),
      phi_(make_feature_extractor(options_.feature_extractor)),
      optimizer_(
          [&] {
            ParamSet p = codec.encoder_params();
            p.append(codec.generator_params());
            if (!codec.config().ema_codebook) p.add("bank", codec.bank());
            return p;
          }(),
          AdamOptions{options_.lr, 0.9, 0.999, 1e-8}),
      rng_(derive_seed(options_.seed, 21)) {
  options_.validate();
  const int n = codec_.config().bank_size;
  last_used_.assign(static_cast<size_t>(n), 0);
  if (codec_.config().ema_codebook) {
    ema_count_ = Tensor(Shape{n}, Real(1));
    ema_sum_ = codec_.bank()->value;
  }
}

void CodecTrainer::init_bank_from(const Tensor& tokens) {
  Tensor& bank = codec_.bank()->value;
  const int n = bank.dim(0), d = bank.dim(1);
  const int t = tokens.dim(0);
  std::vector<int> order(static_cast<size_t>(t));
  std::iota(order.begin(), order.end(), 0);
  for (int i = t - 1; i > 0; --i) std::swap(order[static_cast<size_t>(i)], order[rng_.below(static_cast<std::uint64_t>(i) + 1)]);
  for (int i = 0; i < n; ++i) {
    const int src = order[static_cast<size_t>(i % t)];
    for (int c = 0; c < d; ++c)
      bank[static_cast<std::int64_t>(i) * d + c] =
          tokens[static_cast<std::int64_t>(src) * d + c] + static_cast<Real>(1e-3 * rng_.normal());
  }
  if (codec_.config().ema_codebook) {
    ema_count_.fill(Real(1));
    ema_sum_ = bank;
  }
}

void CodecTrainer::ema_update(const Tensor& tokens, const std::vector<int>& codes) {
  const double decay = codec_.config().ema_decay;
  Tensor& bank = codec_.bank()->value;
  const int n = bank.dim(0), d = bank.dim(1);
  std::vector<double> count(static_cast<size_t>(n), 0.0);
  std::vector<double> sum(static_cast<size_t>(n) * d, 0.0);
  for (size_t i = 0; i < codes.size(); ++i) {
    count[static_cast<size_t>(codes[i])] += 1.0;
    for (int c = 0; c < d; ++c) sum[static_cast<size_t>(codes[i]) * d + c] += tokens[static_cast<std::int64_t>(i) * d + c];
  }
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    ema_count_[i] = static_cast<Real>(decay * ema_count_[i] + (1 - decay) * count[static_cast<size_t>(i)]);
    total += ema_count_[i];
  }
  for (int i = 0; i < n; ++i) {
    // Laplace smoothing keeps rarely used entries from dividing by zero.
    const double smoothed = (ema_count_[i] + 1e-5) / (total + n * 1e-5) * total;
    for (int c = 0; c < d; ++c) {
      const std::int64_t k = static_cast<std::int64_t>(i) * d + c;
      ema_sum_[k] = static_cast<Real>(decay * ema_sum_[k] + (1 - decay) * sum[static_cast<size_t>(k)]);
      bank[k] = static_cast<Real>(ema_sum_[k] / smoothed);
    }
  }
}

int CodecTrainer::reseed_dead_codes(const Tensor& tokens) {
  const int limit = codec_.config().dead_code_steps;
  if (limit <= 0) return 0;
  Tensor& bank = codec_.bank()->value;
  const int d = bank.dim(1), t = tokens.dim(0);
  int reset = 0;
  for (size_t i = 0; i < last_used_.size(); ++i) {
    if (steps_ - last_used_[i] < limit) continue;
    const auto src = static_cast<std::int64_t>(rng_.below(static_cast<std::uint64_t>(t)));
    for (int c = 0; c < d; ++c) bank[static_cast<std::int64_t>(i) * d + c] = tokens[src * d + c];
    if (codec_.config().ema_codebook) {
      ema_count_[static_cast<std::int64_t>(i)] = Real(1);
      for (int c = 0; c < d; ++c) ema_sum_[static_cast<std::int64_t>(i) * d + c] = tokens[src * d + c];
    }
    last_used_[i] = steps_;
    ++reset;
  }
  return reset;
}

CodecLoss codec_loss(const VqCodec& codec, const Var& frames, int frames_per_clip, const FeatureExtractor& phi,
                     double perceptual_weight) {
  CodecLoss out;
  out.forward = codec_forward(codec, frames, frames_per_clip);
  out.recon = ops::l1_loss(out.forward.reconstruction, frames);
  out.perceptual = constant(Tensor::scalar(0));
  if (perceptual_weight > 0) {
    const auto fa = phi.extract(out.forward.reconstruction);
    std::vector<Var> fb;
    {
      NoGradGuard no_grad;
      fb = phi.extract(frames);
    }
    for (size_t i = 0; i < fa.size(); ++i) out.perceptual = ops::add(out.perceptual, ops::l1_loss(fa[i], fb[i]));
  }
  out.total = ops::add(out.recon, ops::scale(out.perceptual, static_cast<Real>(perceptual_weight)));
  out.total = ops::add(out.total, out.forward.commitment_loss);
  if (out.forward.codebook_loss) out.total = ops::add(out.total, out.forward.codebook_loss);
  return out;
}

CodecLossRecord CodecTrainer::step(const std::vector<const VideoClip*>& batch) {
  check_arg(!batch.empty(), "codec step: empty batch");
  const auto& cfg = codec_.config();
  std::vector<VideoClip> converted;
  converted.reserve(batch.size());
  std::vector<const VideoClip*> ptrs;
  for (const VideoClip* c : batch) {
    converted.push_back(cfg.image_channels == 3 ? to_rgb(*c) : to_gray(*c));
    ptrs.push_back(&converted.back());
  }
  const int frames = ptrs.front()->frame_count();
  const Var x = constant(stack_clips(ptrs));

  if (steps_ == 0 && options_.data_init) {
    NoGradGuard no_grad;
    init_bank_from(grid_to_tokens(codec_.encoder().forward(x))->value);
  }

  const CodecLoss loss = codec_loss(codec_, x, frames, *phi_, options_.perceptual_weight);
  const CodecForward& fwd = loss.forward;
  const Var& recon = loss.recon;
  const Var& perceptual = loss.perceptual;
  const Var& total = loss.total;

  CodecLossRecord rec;
  rec.recon_l1 = recon->value[0];
  rec.perceptual = perceptual->value[0];
  rec.commitment = fwd.commitment_loss->value[0];
  rec.codebook = fwd.codebook_loss ? fwd.codebook_loss->value[0] : 0.0;
  rec.total = total->value[0];
  if (!std::isfinite(rec.total))
    fail(ErrorCode::kNumeric, "codec pretraining: non-finite loss at step " + std::to_string(steps_ + 1));

  optimizer_.zero_grad();
  backward(total);
  if (options_.grad_clip > 0) optimizer_.params().clip_grad_norm(options_.grad_clip);
  optimizer_.step();
  ++steps_;

  const Tensor tokens = grid_to_tokens(constant(fwd.latents->value))->value;
  if (cfg.ema_codebook) ema_update(tokens, fwd.codes);
  std::vector<char> seen(last_used_.size(), 0);
  for (int c : fwd.codes) {
    last_used_[static_cast<size_t>(c)] = steps_;
    seen[static_cast<size_t>(c)] = 1;
  }
  rec.codes_used = static_cast<int>(std::count(seen.begin(), seen.end(), 1));
  rec.codes_reset = reseed_dead_codes(tokens);
  rec.step = steps_;
  return rec;
}

void CodecTrainer::save_state(Checkpoint& ckpt) const {
  optimizer_.save_state(ckpt, "adam.");
  Tensor used(Shape{static_cast<int>(last_used_.size())});
  for (size_t i = 0; i < last_used_.size(); ++i) used[static_cast<std::int64_t>(i)] = static_cast<Real>(last_used_[i]);
  ckpt.add("trainer.last_used", used);
  if (codec_.config().ema_codebook) {
    ckpt.add("trainer.ema_count", ema_count_);
    ckpt.add("trainer.ema_sum", ema_sum_);
  }
}

void CodecTrainer::load_state(const Checkpoint& ckpt) {
  optimizer_.load_state(ckpt, "adam.");
  steps_ = optimizer_.step_count();
  if (const Tensor* used = ckpt.find("trainer.last_used"))
    for (size_t i = 0; i < last_used_.size() && static_cast<std::int64_t>(i) < used->numel(); ++i)
      last_used_[i] = static_cast<std::int64_t>((*used)[static_cast<std::int64_t>(i)]);
  if (codec_.config().ema_codebook) {
    if (const Tensor* c = ckpt.find("trainer.ema_count")) ema_count_ = *c;
    if (const Tensor* s = ckpt.find("trainer.ema_sum")) ema_sum_ = *s;
  }
}

DPTC_END_NAMESPACE
