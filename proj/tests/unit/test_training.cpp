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

#include <cmath>

#include "doctest.h"
#include "support/tiny_model.hpp"

#include "training/discriminator.hpp"
#include "training/losses.hpp"

using namespace dptc;

namespace {

std::vector<Tensor> snapshot(const ParamSet& p) {
  std::vector<Tensor> out;
  for (const auto& [name, v] : p.items()) out.push_back(v->value);
  return out;
}

}  // namespace

TEST_CASE("consistency loss closed forms") {
  const VideoClip hq = tiny::clips(1).front();
  IdentityExtractor phi;
  CHECK(consistency_loss(hq, hq, phi) == 0.0);
  VideoClip shifted = hq;
  for (auto& v : shifted.frames.values()) v += Real(0.1);
  CHECK(consistency_loss(shifted, hq, phi) == doctest::Approx(0.2).epsilon(1e-5));
}

TEST_CASE("adversarial closed forms") {
  const Var half = constant(Tensor({2}, 0.5f));
  CHECK(discriminator_loss(half, half)->value[0] == doctest::Approx(2 * std::log(2.0)).epsilon(1e-6));
  const Var one = constant(Tensor({2}, 1.0f)), zero = constant(Tensor({2}, 0.0f));
  CHECK(discriminator_loss(one, zero)->value[0] == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(std::isfinite(discriminator_loss(zero, one)->value[0]));
  CHECK(generator_adversarial_loss(half, GanLoss::kSaturating)->value[0] == doctest::Approx(std::log(0.5)));
  CHECK(generator_adversarial_loss(half, GanLoss::kNonSaturating)->value[0] == doctest::Approx(std::log(2.0)));
}

TEST_CASE("discriminator maps clips to probabilities") {
  DiscriminatorConfig dc;
  dc.channels = {4, 4};
  Discriminator d(dc);
  const auto clips = tiny::clips(2);
  std::vector<const VideoClip*> ptr{&clips[0], &clips[1]};
  const Var p = d.forward(constant(stack_clips(ptr)), 4);
  REQUIRE(p->value.shape() == Shape{2});
  for (Real v : p->value.values()) CHECK((v > 0 && v < 1));
  const AdversarialTerms t = adversarial_losses(clips[0], clips[1], d);
  CHECK(std::isfinite(t.gen_term));
  CHECK(t.disc_term > 0);
}

TEST_CASE("ground-truth codes are deterministic") {
  tiny::Setup s(1);
  CHECK(derive_gt_codes(s.hq[0], *s.codec) == derive_gt_codes(s.hq[0], *s.codec));
}

TEST_CASE("restoration forward shapes and motion prerequisites") {
  tiny::Setup s(1);
  const VideoClip out = s.model->restore(s.lq[0]);
  CHECK(out.frames.shape() == s.hq[0].frames.shape());
  RestorationModel bare(s.cfg, *s.codec);
  CHECK_FALSE(bare.motion_ready());
  try {
    bare.restore(s.lq[0], true);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingPrerequisite);
  }
  CHECK(bare.restore(s.lq[0], false).frames.shape() == out.frames.shape());
}

TEST_CASE("the vision bank stays frozen during restoration training") {
  tiny::Setup s(2);
  const Tensor bank = s.model->codec().bank()->value;
  RestorationTrainer trainer(*s.model, tiny::train_config());
  trainer.step(s.pairs());
  CHECK(s.model->codec().bank()->value.storage() == bank.storage());
}

TEST_CASE("with lambda 0 the bank targets do not influence any update") {
  auto run = [](bool shuffle_targets) {
    tiny::Setup s(2);
    if (shuffle_targets)
      for (auto& g : s.gt)
        for (auto& c : g.codes) c = (c + 5) % s.cfg.codec.bank_size;
    TrainConfig tc = tiny::train_config();
    tc.lambda = 0;
    RestorationTrainer trainer(*s.model, tc);
    trainer.step(s.pairs());
    return snapshot(s.model->trainable_params());
  };
  const auto a = run(false), b = run(true);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].storage() == b[i].storage());
}

TEST_CASE("with lambda > 0 the bank targets do change the predictor") {
  auto run = [](bool shuffle_targets) {
    tiny::Setup s(2);
    if (shuffle_targets)
      for (auto& g : s.gt)
        for (auto& c : g.codes) c = (c + 5) % s.cfg.codec.bank_size;
    RestorationTrainer trainer(*s.model, tiny::train_config());
    trainer.step(s.pairs());
    return snapshot(s.model->predictor_params());
  };
  const auto a = run(false), b = run(true);
  bool differs = false;
  for (size_t i = 0; i < a.size(); ++i) differs |= a[i].storage() != b[i].storage();
  CHECK(differs);
}

TEST_CASE("training is deterministic for a fixed seed") {
  auto run = [] {
    tiny::Setup s(2);
    RestorationTrainer trainer(*s.model, tiny::train_config());
    std::vector<LossRecord> recs;
    for (int i = 0; i < 3; ++i) recs.push_back(trainer.step(s.pairs()));
    return recs;
  };
  const auto a = run(), b = run();
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].step == b[i].step);
    CHECK(a[i].consi == b[i].consi);
    CHECK(a[i].adv_g == b[i].adv_g);
    CHECK(a[i].adv_d == b[i].adv_d);
    CHECK(a[i].bank == b[i].bank);
  }
  CHECK(a.back().step == 3);
}

TEST_CASE("trainer state round trips through a checkpoint") {
  tiny::Setup s(2);
  RestorationTrainer trainer(*s.model, tiny::train_config());
  trainer.step(s.pairs());
  Checkpoint ckpt;
  ckpt.add_params(s.model->all_params());
  trainer.save_state(ckpt);
  const LossRecord next = trainer.step(s.pairs());

  tiny::Setup t(2);
  ckpt.load_params(t.model->all_params());
  RestorationTrainer resumed(*t.model, tiny::train_config());
  resumed.load_state(ckpt);
  CHECK(resumed.step_count() == 1);
  const LossRecord again = resumed.step(t.pairs());
  CHECK(again.consi == doctest::Approx(next.consi).epsilon(1e-6));
  CHECK(again.bank == doctest::Approx(next.bank).epsilon(1e-6));
}

TEST_CASE("gan loss names round trip") {
  for (auto g : {GanLoss::kSaturating, GanLoss::kNonSaturating}) CHECK(parse_gan_loss(to_string(g)) == g);
}
