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

#include "training/trainer.hpp"

#include <cmath>

DPTC_BEGIN_NAMESPACE

void TrainConfig::validate() const {
  if (!(lr > 0)) fail(ErrorCode::kConfig, "lr must be positive");
  if (disc_lr < 0) fail(ErrorCode::kConfig, "disc_lr must be non-negative");
  if (batch_size < 1) fail(ErrorCode::kConfig, "batch_size must be at least 1");
  if (iterations < 0) fail(ErrorCode::kConfig, "iterations must be non-negative");
  if (lambda < 0) fail(ErrorCode::kConfig, "lambda must be non-negative");
  if (clip_frames < 1) fail(ErrorCode::kConfig, "clip_frames must be positive");
  if (ckpt_every < 0) fail(ErrorCode::kConfig, "ckpt_every must be non-negative");
}

RestorationTrainer::RestorationTrainer(RestorationModel& model, TrainConfig cfg)
    : model_(model),
      cfg_((cfg.validate(), std::move(cfg))),
      phi_(make_feature_extractor(cfg_.feature_extractor)),
      disc_([&] {
        DiscriminatorConfig d = cfg_.discriminator;
        d.image_channels = model.config().codec.image_channels;
        d.seed = derive_seed(cfg_.seed, 61);
        return d;
      }()),
      g_opt_(model.trainable_params(), AdamOptions{cfg_.lr, cfg_.beta1, cfg_.beta2, 1e-8}),
      d_opt_(disc_.params(), AdamOptions{cfg_.disc_lr > 0 ? cfg_.disc_lr : cfg_.lr, cfg_.beta1, cfg_.beta2, 1e-8}) {}

GeneratorLoss generator_loss(const RestorationModel& model, const Discriminator& disc, const FeatureExtractor& phi,
                             const Var& lq, const Var& hq, const std::vector<int>& targets, int batch,
                             const TrainConfig& cfg) {
  GeneratorLoss g;
  g.output = model.forward(lq, batch, model.motion_ready());
  g.consi = consistency_loss(g.output.restored, hq, phi);
  g.shown = ops::clamp(g.output.restored, Real(0), Real(1));
  g.adv = generator_adversarial_loss(disc.forward(g.shown, model.config().codec.clip_frames), cfg.gan_loss);
  g.bank = bank_prediction_loss(g.output.logits, targets);
  g.total = ops::add(ops::add(g.consi, g.adv), ops::scale(g.bank, static_cast<Real>(cfg.lambda)));
  return g;
}

LossRecord RestorationTrainer::step(const std::vector<TrainingPair>& batch) {
  check_arg(!batch.empty(), "train_step: empty batch");
  const auto& codec_cfg = model_.config().codec;
  std::vector<VideoClip> lq, hq;
  std::vector<int> targets;
  for (const auto& pair : batch) {
    check_arg(pair.lq && pair.hq && pair.gt_codes, "train_step: incomplete training pair");
    lq.push_back(codec_cfg.image_channels == 3 ? to_rgb(*pair.lq) : to_gray(*pair.lq));
    hq.push_back(codec_cfg.image_channels == 3 ? to_rgb(*pair.hq) : to_gray(*pair.hq));
    targets.insert(targets.end(), pair.gt_codes->codes.begin(), pair.gt_codes->codes.end());
  }
  std::vector<const VideoClip*> lq_ptr, hq_ptr;
  for (size_t i = 0; i < lq.size(); ++i) {
    lq_ptr.push_back(&lq[i]);
    hq_ptr.push_back(&hq[i]);
  }
  const int b = static_cast<int>(batch.size());
  const int frames = codec_cfg.clip_frames;
  const Var x_lq = constant(stack_clips(lq_ptr));
  const Var x_hq = constant(stack_clips(hq_ptr));

  // Generator side: E, C, fusion, G.
  const GeneratorLoss g = generator_loss(model_, disc_, *phi_, x_lq, x_hq, targets, b, cfg_);
  const Var& consi = g.consi;
  const Var& adv_g = g.adv;
  const Var& bank = g.bank;
  const Var& total_g = g.total;
  const Var& shown = g.shown;

  LossRecord rec;
  rec.consi = consi->value[0];
  rec.adv_g = adv_g->value[0];
  rec.bank = bank->value[0];
  rec.total_g = total_g->value[0];
  if (!std::isfinite(rec.total_g))
    fail(ErrorCode::kNumeric, "train_step: non-finite generator loss at step " + std::to_string(step_count() + 1));

  g_opt_.zero_grad();
  backward(total_g);
  if (cfg_.grad_clip > 0) g_opt_.params().clip_grad_norm(cfg_.grad_clip);
  g_opt_.step();

  // Discriminator side on the detached restoration.
  d_opt_.zero_grad();
  const Var p_real = disc_.forward(x_hq, frames);
  const Var p_fake = disc_.forward(ops::detach(shown), frames);
  const Var total_d = discriminator_loss(p_real, p_fake);
  rec.adv_d = total_d->value[0];
  rec.total_d = rec.adv_d;
  if (!std::isfinite(rec.total_d))
    fail(ErrorCode::kNumeric, "train_step: non-finite discriminator loss at step " + std::to_string(step_count()));
  backward(total_d);
  if (cfg_.grad_clip > 0) d_opt_.params().clip_grad_norm(cfg_.grad_clip);
  d_opt_.step();
  d_opt_.zero_grad();

  rec.step = step_count();
  return rec;
}

void RestorationTrainer::save_state(Checkpoint& ckpt) const {
  ckpt.add_params(disc_.params());
  g_opt_.save_state(ckpt, "adam_g.");
  d_opt_.save_state(ckpt, "adam_d.");
}

void RestorationTrainer::load_state(const Checkpoint& ckpt) {
  if (ckpt.find("adam_g.steps") == nullptr) return;
  ckpt.load_params(disc_.params());
  g_opt_.load_state(ckpt, "adam_g.");
  d_opt_.load_state(ckpt, "adam_d.");
}

DPTC_END_NAMESPACE
