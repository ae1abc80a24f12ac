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

#include "training/losses.hpp"

#include "training/discriminator.hpp"

DPTC_BEGIN_NAMESPACE

namespace {

constexpr Real kLo = static_cast<Real>(kProbFloor);
constexpr Real kHi = static_cast<Real>(1.0 - kProbFloor);

Var one_minus(const Var& p) { return ops::add_scalar(ops::scale(p, Real(-1)), Real(1)); }

}  // namespace

std::string to_string(GanLoss loss) { return loss == GanLoss::kNonSaturating ? "nonsaturating" : "saturating"; }

GanLoss parse_gan_loss(const std::string& text) {
  if (text == "saturating") return GanLoss::kSaturating;
  if (text == "nonsaturating") return GanLoss::kNonSaturating;
  fail(ErrorCode::kConfig, "unknown gan_loss '" + text + "'");
}

Var consistency_loss(const Var& restored, const Var& reference, const FeatureExtractor& phi) {
  if (restored->shape() != reference->shape())
    fail(ErrorCode::kInvalidArgument, "consistency_loss: geometry mismatch " + shape_to_string(restored->shape()) +
                                          " vs " + shape_to_string(reference->shape()));
  Var loss = ops::l1_loss(restored, reference);
  const auto fa = phi.extract(restored);
  const auto fb = phi.extract(reference);
  for (size_t i = 0; i < fa.size(); ++i) loss = ops::add(loss, ops::l1_loss(fa[i], fb[i]));
  return loss;
}

double consistency_loss(const VideoClip& restored, const VideoClip& reference, const FeatureExtractor& phi) {
  NoGradGuard no_grad;
  return consistency_loss(constant(restored.frames), constant(reference.frames), phi)->value[0];
}

Var discriminator_loss(const Var& p_real, const Var& p_fake) {
  const Var real_term = ops::mean(ops::log_clamped(p_real, kLo, kHi));
  const Var fake_term = ops::mean(ops::log_clamped(one_minus(p_fake), kLo, kHi));
  return ops::scale(ops::add(real_term, fake_term), Real(-1));
}

Var generator_adversarial_loss(const Var& p_fake, GanLoss kind) {
  if (kind == GanLoss::kNonSaturating) return ops::scale(ops::mean(ops::log_clamped(p_fake, kLo, kHi)), Real(-1));
  return ops::mean(ops::log_clamped(one_minus(p_fake), kLo, kHi));
}

AdversarialTerms adversarial_losses(const VideoClip& restored, const VideoClip& reference, const Discriminator& d,
                                    GanLoss kind) {
  if (!same_geometry(restored, reference)) fail(ErrorCode::kInvalidArgument, "adversarial_losses: geometry mismatch");
  NoGradGuard no_grad;
  const int f = restored.frame_count();
  const Var p_fake = d.forward(constant(restored.frames), f);
  const Var p_real = d.forward(constant(reference.frames), f);
  AdversarialTerms out;
  out.gen_term = generator_adversarial_loss(p_fake, kind)->value[0];
  out.disc_term = discriminator_loss(p_real, p_fake)->value[0];
  return out;
}

Var bank_prediction_loss(const Var& logits, const std::vector<int>& targets) {
  const int n = logits->value.dim(-1);
  for (int t : targets)
    if (t < 0 || t >= n)
      fail(ErrorCode::kInvalidArgument, "bank_prediction_loss: target " + std::to_string(t) + " outside [0," +
                                            std::to_string(n) + ")");
  return ops::cross_entropy(logits, targets);
}

double bank_prediction_loss(const LogitsGrid& logits, const IndexGrid& gt) {
  if (gt.frames != logits.frames() || gt.height != logits.height() || gt.width != logits.width())
    fail(ErrorCode::kInvalidArgument, "bank_prediction_loss: logits and targets differ in shape");
  NoGradGuard no_grad;
  return bank_prediction_loss(constant(logits.values), gt.codes)->value[0];
}

DPTC_END_NAMESPACE
