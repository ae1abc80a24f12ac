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
#include <filesystem>

#include "doctest.h"
#include "support/oracles.hpp"

#include "core/checkpoint.hpp"
#include "core/layers.hpp"
#include "core/optim.hpp"
#include "core/rng.hpp"

using namespace dptc;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<Real>(scale * rng.normal());
  return t;
}

oracle::Vec to_vec(const Tensor& t) { return oracle::Vec(t.values().begin(), t.values().end()); }

}  // namespace

TEST_CASE("rng streams are reproducible and decorrelated") {
  Rng a(42), b(42), c(derive_seed(42, 1));
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(Rng(42).next_u64() != c.next_u64());
  Rng u(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
    CHECK(u.below(7) < 7u);
  }
}

TEST_CASE("conv2d matches direct cross-correlation") {
  Rng rng(1);
  for (auto [stride, pad, k] : {std::tuple{1, 1, 3}, std::tuple{2, 1, 3}, std::tuple{2, 0, 4}, std::tuple{1, 0, 1}}) {
    const Tensor x = random_tensor({2, 3, 9, 8}, rng), w = random_tensor({4, 3, k, k}, rng), b = random_tensor({4}, rng);
    const Var y = ops::conv2d(constant(x), constant(w), constant(b), stride, pad);
    int oh = 0, ow = 0;
    const auto ref = oracle::conv2d(to_vec(x), 2, 3, 9, 8, to_vec(w), to_vec(b), 4, k, stride, pad, &oh, &ow);
    REQUIRE(y->value.shape() == Shape{2, 4, oh, ow});
    for (size_t i = 0; i < ref.size(); ++i) CHECK(y->value[static_cast<std::int64_t>(i)] == doctest::Approx(ref[i]).epsilon(1e-4));
  }
}

TEST_CASE("conv_transpose2d is the adjoint of conv2d") {
  // <conv(x), y> == <x, convT(y)> for matching weights.
  Rng rng(2);
  const Tensor x = random_tensor({1, 3, 8, 8}, rng), w = random_tensor({5, 3, 4, 4}, rng);
  const Var cx = ops::conv2d(constant(x), constant(w), nullptr, 2, 1);
  const Tensor y = random_tensor(cx->value.shape(), rng);
  const Var ty = ops::conv_transpose2d(constant(y), constant(w), nullptr, 2, 1);
  REQUIRE(ty->value.shape() == x.shape());
  double lhs = 0, rhs = 0;
  for (std::int64_t i = 0; i < y.numel(); ++i) lhs += double(cx->value[i]) * y[i];
  for (std::int64_t i = 0; i < x.numel(); ++i) rhs += double(x[i]) * ty->value[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-4));
}

TEST_CASE("multi-head attention matches per-head softmax attention") {
  Rng rng(3);
  const int s = 2, tq = 5, tk = 7, d = 8, heads = 2, dh = d / heads;
  const Tensor q = random_tensor({s, tq, d}, rng), k = random_tensor({s, tk, d}, rng), v = random_tensor({s, tk, d}, rng);
  ops::AttentionProbe probe;
  const Var out = ops::attention(constant(q), constant(k), constant(v), heads, &probe);
  REQUIRE(probe.probs.shape() == Shape{s, heads, tq, tk});
  for (int seq = 0; seq < s; ++seq)
    for (int h = 0; h < heads; ++h) {
      oracle::Vec qs, ks, vs;
      for (int t = 0; t < tq; ++t)
        for (int e = 0; e < dh; ++e) qs.push_back(q[(seq * tq + t) * d + h * dh + e]);
      for (int t = 0; t < tk; ++t)
        for (int e = 0; e < dh; ++e) {
          ks.push_back(k[(seq * tk + t) * d + h * dh + e]);
          vs.push_back(v[(seq * tk + t) * d + h * dh + e]);
        }
      oracle::Vec probs;
      const auto ref = oracle::attention(qs, ks, vs, tq, tk, dh, &probs);
      for (int t = 0; t < tq; ++t) {
        for (int e = 0; e < dh; ++e)
          CHECK(out->value[(seq * tq + t) * d + h * dh + e] == doctest::Approx(ref[t * dh + e]).epsilon(1e-4));
        for (int j = 0; j < tk; ++j)
          CHECK(probe.probs[((seq * heads + h) * tq + t) * tk + j] == doctest::Approx(probs[t * tk + j]).epsilon(1e-4));
      }
    }
}

TEST_CASE("cross entropy matches log-sum-exp reference") {
  Rng rng(4);
  const int t = 6, n = 11;
  const Tensor logits = random_tensor({t, n}, rng, 3.0);
  std::vector<int> targets;
  double ref = 0;
  for (int i = 0; i < t; ++i) {
    targets.push_back(static_cast<int>(rng.below(n)));
    ref += oracle::cross_entropy(oracle::Vec(logits.data() + i * n, logits.data() + (i + 1) * n), n, targets.back());
  }
  CHECK(ops::cross_entropy(constant(logits), targets)->value[0] == doctest::Approx(ref / t).epsilon(1e-5));
  CHECK_THROWS_AS(ops::cross_entropy(constant(logits), std::vector<int>(t, n)), Error);
}

TEST_CASE("layer norm normalizes the last axis") {
  Rng rng(5);
  const Tensor x = random_tensor({3, 16}, rng, 4.0);
  const Var y = ops::layer_norm(constant(x), constant(Tensor({16}, 1)), constant(Tensor({16}, 0)));
  for (int r = 0; r < 3; ++r) {
    double m = 0, v = 0;
    for (int i = 0; i < 16; ++i) m += y->value[r * 16 + i];
    m /= 16;
    for (int i = 0; i < 16; ++i) v += (y->value[r * 16 + i] - m) * (y->value[r * 16 + i] - m);
    CHECK(m == doctest::Approx(0).epsilon(1e-5));
    CHECK(v / 16 == doctest::Approx(1).epsilon(1e-3));
  }
}

TEST_CASE("straight-through passes the quantized value and the source gradient") {
  const Var src = parameter(Tensor({3}, std::vector<Real>{1, 2, 3}));
  const Var q = parameter(Tensor({3}, std::vector<Real>{5, 5, 5}));
  const Var y = ops::straight_through(src, q);
  CHECK(y->value[1] == 5);
  backward(ops::sum(ops::scale(y, 2)));
  CHECK(src->grad[0] == 2);
  CHECK(q->grad.numel() == 0);
}

TEST_CASE("no-grad guard suppresses graph recording") {
  const Var p = parameter(Tensor({2}, 1));
  {
    NoGradGuard guard;
    CHECK_FALSE(grad_enabled());
    const Var y = ops::mul(p, p);
    CHECK(y->inputs.empty());
  }
  CHECK(grad_enabled());
}

TEST_CASE("adam first step moves each weight by lr against the gradient sign") {
  const Var p = parameter(Tensor({3}, std::vector<Real>{0, 0, 0}));
  ParamSet set;
  set.add("p", p);
  Adam adam(set, AdamOptions{0.1, 0.9, 0.999, 1e-8});
  p->ensure_grad() = Tensor({3}, std::vector<Real>{2, -0.5, 0});
  adam.step();
  CHECK(p->value[0] == doctest::Approx(-0.1).epsilon(1e-5));
  CHECK(p->value[1] == doctest::Approx(0.1).epsilon(1e-5));
  CHECK(p->value[2] == doctest::Approx(0.0));
}

TEST_CASE("gradient clipping bounds the global norm") {
  const Var a = parameter(Tensor({2}, 0)), b = parameter(Tensor({1}, 0));
  ParamSet set;
  set.add("a", a);
  set.add("b", b);
  a->ensure_grad() = Tensor({2}, std::vector<Real>{3, 0});
  b->ensure_grad() = Tensor({1}, std::vector<Real>{4});
  CHECK(set.clip_grad_norm(1.0) == doctest::Approx(5.0));
  CHECK(set.grad_norm() == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("checkpoint round trip preserves blocks and header") {
  const auto path = std::filesystem::temp_directory_path() / "dptc_unit_ckpt.bin";
  Rng rng(6);
  Checkpoint c;
  c.config_json = R"({"a":1})";
  c.config_digest = digest_hex(c.config_json);
  c.step_count = 17;
  c.add("w", random_tensor({2, 3}, rng));
  c.add("s", Tensor::scalar(4));
  save_checkpoint(c, path);
  const Checkpoint r = load_checkpoint(path);
  CHECK(r.step_count == 17);
  CHECK(r.config_digest == c.config_digest);
  CHECK(r.config_json == c.config_json);
  REQUIRE(r.find("w") != nullptr);
  CHECK(r.get("w").storage() == c.get("w").storage());
  CHECK(r.get("s")[0] == 4);
  CHECK(r.find("missing") == nullptr);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), Error);
}

TEST_CASE("digest is stable FNV-1a") {
  CHECK(digest_hex("") == "cbf29ce484222325");
  CHECK(digest_hex("a") == "af63dc4c8601ec8c");
}
