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

#include <string>
#include <utility>
#include <vector>

#include "codec/perceptual.hpp"
#include "media/video_clip.hpp"
#include "predictor/content_predictor.hpp"

DPTC_BEGIN_NAMESPACE

class Discriminator;

enum class GanLoss { kSaturating, kNonSaturating };
std::string to_string(GanLoss loss);
GanLoss parse_gan_loss(const std::string& text);

/// Probabilities are clamped to [kProbFloor, 1 - kProbFloor] before logs.
inline constexpr double kProbFloor = 1e-6;

/// L1(a, b) + sum over extractor layers of L1(phi(a), phi(b)); a, b [N, C, H, W].
Var consistency_loss(const Var& restored, const Var& reference, const FeatureExtractor& phi);
double consistency_loss(const VideoClip& restored, const VideoClip& reference, const FeatureExtractor& phi);

/// -[log p_real + log(1 - p_fake)], averaged over the batch.
Var discriminator_loss(const Var& p_real, const Var& p_fake);
/// kSaturating: log(1 - p_fake). kNonSaturating: -log p_fake. Averaged over the batch.
Var generator_adversarial_loss(const Var& p_fake, GanLoss kind = GanLoss::kSaturating);

struct AdversarialTerms {
  double gen_term = 0;
  double disc_term = 0;
};
AdversarialTerms adversarial_losses(const VideoClip& restored, const VideoClip& reference, const Discriminator& d,
                                    GanLoss kind = GanLoss::kSaturating);

/// Mean token cross-entropy; logits [..., N], one target per token.
Var bank_prediction_loss(const Var& logits, const std::vector<int>& targets);
double bank_prediction_loss(const LogitsGrid& logits, const IndexGrid& gt);

DPTC_END_NAMESPACE
