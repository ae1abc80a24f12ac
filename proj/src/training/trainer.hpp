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
#include <memory>
#include <string>
#include <vector>

#include "core/optim.hpp"
#include "training/discriminator.hpp"
#include "training/losses.hpp"
#include "training/restoration_model.hpp"

DPTC_BEGIN_NAMESPACE

struct TrainConfig {
  double lr = 8e-5;
  /// Discriminator learning rate; 0 means "same as lr".
  double disc_lr = 0;
  int batch_size = 4;
  int iterations = 2000;
  double lambda = 0.5;
  std::uint64_t seed = 0;
  int clip_frames = 8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  GanLoss gan_loss = GanLoss::kSaturating;
  double grad_clip = 1.0;
  int ckpt_every = 500;
  std::string feature_extractor = "random_conv_pyramid";
  DiscriminatorConfig discriminator;

  void validate() const;
};

struct LossRecord {
  std::int64_t step = 0;
  double consi = 0;
  double adv_g = 0;
  double adv_d = 0;
  double bank = 0;
  double total_g = 0;
  double total_d = 0;
};

struct TrainingPair {
  const VideoClip* lq = nullptr;
  const VideoClip* hq = nullptr;
  const IndexGrid* gt_codes = nullptr;
};

/// Generator-side objective consi + adv + lambda * bank. The discriminator
/// scores the restoration clamped to [0, 1]; the consistency term uses it raw.
struct GeneratorLoss {
  RestorationModel::Output output;
  Var shown;  // clamped restoration
  Var consi, adv, bank, total;
};
GeneratorLoss generator_loss(const RestorationModel& model, const Discriminator& disc, const FeatureExtractor& phi,
                             const Var& lq, const Var& hq, const std::vector<int>& targets, int batch,
                             const TrainConfig& cfg);

/// Stage-2 loop: one generator-side Adam step on consi + adv + lambda * bank,
/// then one discriminator Adam step on detached restorations.
class RestorationTrainer {
 public:
  RestorationTrainer(RestorationModel& model, TrainConfig cfg);

  LossRecord step(const std::vector<TrainingPair>& batch);

  const TrainConfig& config() const noexcept { return cfg_; }
  Discriminator& discriminator() noexcept { return disc_; }
  Adam& generator_optimizer() noexcept { return g_opt_; }
  Adam& discriminator_optimizer() noexcept { return d_opt_; }
  std::int64_t step_count() const noexcept { return g_opt_.step_count(); }

  void save_state(Checkpoint& ckpt) const;
  void load_state(const Checkpoint& ckpt);

 private:
  RestorationModel& model_;
  TrainConfig cfg_;
  std::unique_ptr<FeatureExtractor> phi_;
  Discriminator disc_;
  Adam g_opt_;
  Adam d_opt_;
};

DPTC_END_NAMESPACE
