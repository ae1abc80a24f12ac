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

#include "doctest.h"
#include "support/gradient_suite.hpp"

#include "core/layers.hpp"

using namespace dptc;

namespace {

void require_pass(const gradcheck::Result& r, int samples) {
  INFO("worst relative error " << r.worst << ", resampled " << r.resampled);
  CHECK(r.checked == samples);
  CHECK(r.failed == 0);
}

Tensor random(Shape s, Rng& rng) {
  Tensor t(std::move(s));
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

}  // namespace

static_assert(sizeof(Real) == sizeof(double), "gradient checks need the double-precision core");

TEST_CASE("primitive ops") {
  Rng rng(1);
  const Var x = parameter(random({2, 3, 6, 6}, rng));
  const Var w = parameter(random({4, 3, 3, 3}, rng));
  const Var wt = parameter(random({4, 2, 4, 4}, rng));
  const Var b = parameter(random({4}, rng));
  ParamSet ps;
  ps.add("x", x);
  ps.add("w", w);
  ps.add("wt", wt);
  ps.add("b", b);
  auto loss = [&] {
    Var y = ops::silu(ops::conv2d(x, w, b, 2, 1));
    y = ops::conv_transpose2d(y, wt, nullptr, 2, 1);
    return ops::mean(ops::mul(ops::gelu(y), y));
  };
  require_pass(gradcheck::check(loss, ps, gradcheck::Options{40}), 40);
}

TEST_CASE("attention, layer norm and position tables") {
  Rng rng(2);
  nn::SelfAttentionBlock blk(8, 2, 2, rng);
  const Var x = parameter(random({2, 6, 8}, rng));
  const Var tpos = parameter(random({2, 8}, rng));
  const Var spos = parameter(random({3, 8}, rng));
  ParamSet ps;
  blk.collect(ps, "blk.");
  ps.add("x", x);
  ps.add("t", tpos);
  ps.add("s", spos);
  auto loss = [&] { return ops::cross_entropy(blk(ops::add_position(x, tpos, spos)), {1, 2, 3, 4, 5, 6, 7, 0, 1, 2, 3, 4}); };
  require_pass(gradcheck::check(loss, ps, gradcheck::Options{40}), 40);
}

TEST_CASE("conv3d and cross attention") {
  Rng rng(3);
  nn::Conv3d conv(3, 4, 3, 3, rng);
  nn::CrossAttentionBlock cross(4, 2, 2, rng);
  // Break the zero init so every path carries gradient.
  for (auto& v : cross.proj.weight->value.values()) v = 0.3 * rng.normal();
  for (auto& v : cross.ffn_out.weight->value.values()) v = 0.3 * rng.normal();
  const Var x = parameter(random({1, 3, 3, 4, 4}, rng));
  ParamSet ps;
  conv.collect(ps, "c.");
  cross.collect(ps, "x.");
  ps.add("x", x);
  auto loss = [&] {
    const Var y = conv(x);                                             // [1, 3, 4, 4, 4]
    const Var tok = ops::reshape(ops::permute(y, {0, 1, 3, 4, 2}), {3, 16, 4});
    return ops::mean(ops::mul(cross(tok, ops::scale(tok, 0.5)), tok));
  };
  require_pass(gradcheck::check(loss, ps, gradcheck::Options{40}), 40);
}

TEST_CASE("codec reconstruction objective") { require_pass(gradient_suite::codec_reconstruction({}), 20); }

TEST_CASE("codebook and commitment terms") { require_pass(gradient_suite::codec_vq_terms({}), 40); }

TEST_CASE("bank cross-entropy") { require_pass(gradient_suite::bank_cross_entropy({}), 20); }

TEST_CASE("total generator objective") { require_pass(gradient_suite::total_generator({}), 20); }
