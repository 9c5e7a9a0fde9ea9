// Copyright 2026 The ConceptLM Authors.
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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>

#include "clm/common/error.hpp"
#include "clm/common/rng.hpp"
#include "clm/nn/gradcheck.hpp"
#include "clm/nn/layers.hpp"
#include "clm/nn/ops.hpp"
#include "clm/nn/optim.hpp"
#include "gradcheck_cases.hpp"
#include "test_helpers.hpp"

using namespace clm;
using namespace clm::nn;
using TD = Tensor<double>;
using testing::draw;
using testing::random_tensor;

TEST_CASE("tensor construction validates shapes") {
  CHECK_THROWS_AS(TD::from({2, 2}, {1, 2, 3}), Error);
  CHECK_THROWS_AS(TD::from({0, 2}, {}), Error);
  const TD t = TD::from({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK_THROWS_AS(add(t, TD::zeros({3, 2})), Error);
  CHECK_THROWS_AS(matmul(t, TD::zeros({2, 2})), Error);
}

TEST_CASE("forward primitive values") {
  const TD x = TD::from({2, 2}, {1, 2, 3, 4});
  CHECK(mse(x, x).item() == 0.0);
  const TD s = softmax(TD::from({4}, {0.3, 0.3, 0.3, 0.3}));
  for (double v : s.data()) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
  const TD prod = matmul(x, TD::from({2, 1}, {1, -1}));
  CHECK(prod.data()[0] == -1.0);
  CHECK(prod.data()[1] == -1.0);
  const TD ln = layer_norm(TD::from({1, 4}, {1, 2, 3, 4}), TD(), TD());
  double m = 0, v = 0;
  for (double e : ln.data()) m += e / 4;
  for (double e : ln.data()) v += (e - m) * (e - m) / 4;
  CHECK(std::abs(m) < 1e-12);
  CHECK(v == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(gelu(TD::from({1}, {0.0})).item() == 0.0);
}

TEST_CASE("attention rows are distributions and causal masking is exact") {
  Rng rng(3);
  ParameterStore<float> store;
  auto attn = make_attention(store, "attn", 16, 4, rng, 0.5);
  std::vector<float> xs(6 * 16);
  for (float& v : xs) v = static_cast<float>(rng.normal());
  const auto x = Tensor<float>::from({6, 16}, xs);
  const auto y = causal_self_attention(attn, x);

  auto perturbed = xs;
  for (std::size_t j = 0; j < 16; ++j) perturbed[3 * 16 + j] += 0.5f;
  const auto y2 = causal_self_attention(attn, Tensor<float>::from({6, 16}, perturbed));
  for (std::size_t i = 0; i < 3 * 16; ++i) CHECK(y.data()[i] == y2.data()[i]);
  bool row3_changed = false;
  for (std::size_t j = 0; j < 16; ++j) row3_changed |= y.data()[3 * 16 + j] != y2.data()[3 * 16 + j];
  CHECK(row3_changed);

  // Probabilities: attend a one-hot value matrix so the output is the
  // attention row itself.
  const std::size_t n = 5;
  std::vector<double> vals(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) vals[j * n + j] = 1.0;
  const TD q = random_tensor(rng, {3, n}, 1.0, false);
  const TD k = random_tensor(rng, {n, n}, 1.0, false);
  const TD probs = attention(q, k, TD::from({n, n}, vals), 1, {5, 2, 1});
  for (std::size_t i = 0; i < 3; ++i) {
    double total = 0;
    for (std::size_t j = 0; j < n; ++j) total += probs.data()[i * n + j];
    CHECK(std::abs(total - 1.0) < 1e-6);
  }
  CHECK(probs.data()[1 * n + 2] == 0.0);
  CHECK(probs.data()[2 * n + 0] == 1.0);
}

TEST_CASE("outputs of one row do not depend on the other rows") {
  Rng rng(5);
  ParameterStore<float> store;
  auto lin = make_linear(store, "lin", 24, 40, rng, 0.3);
  std::vector<float> xs(9 * 24);
  for (float& v : xs) v = static_cast<float>(rng.normal());
  const auto all = lin(Tensor<float>::from({9, 24}, xs));
  for (std::size_t i = 0; i < 9; ++i) {
    std::vector<float> row(xs.begin() + i * 24, xs.begin() + (i + 1) * 24);
    const auto one = lin(Tensor<float>::from({1, 24}, row));
    for (std::size_t j = 0; j < 40; ++j) CHECK(one.data()[j] == all.data()[i * 40 + j]);
  }
}

TEST_CASE("backward semantics") {
  SUBCASE("closed-form mse gradient") {
    const TD w = TD::from({2}, {0.7, -1.3}, true);
    const TD x = TD::from({2}, {2.0, 0.5});
    const TD y = TD::from({2}, {1.0, 3.0});
    mse(mul(w, x), y).backward();
    for (std::size_t i = 0; i < 2; ++i) {
      const double expected = 2.0 / 2.0 * (w.data()[i] * x.data()[i] - y.data()[i]) * x.data()[i];
      CHECK(std::abs(w.grad()[i] - expected) < 1e-10);
    }
  }
  SUBCASE("accumulates across calls") {
    const TD w = TD::from({1}, {3.0}, true);
    const TD loss = mul(w, w);
    loss.backward();
    loss.backward();
    CHECK(w.grad()[0] == 12.0);
  }
  SUBCASE("constant loss gives zero gradients") {
    TD w = TD::from({3}, {1, 2, 3}, true);
    w.zero_grad();
    const TD loss = sum(add(scale(w, 0.0), TD::from({3}, {1, 1, 1})));
    loss.backward();
    for (double g : w.grad()) CHECK(g == 0.0);
  }
  SUBCASE("non-scalar loss is rejected") {
    const TD w = TD::from({2}, {1, 2}, true);
    CHECK_THROWS_AS(scale(w, 2.0).backward(), Error);
  }
  SUBCASE("no-grad mode records nothing") {
    const TD w = TD::from({1}, {2.0}, true);
    NoGradGuard guard;
    CHECK_FALSE(mul(w, w).requires_grad());
  }
  SUBCASE("debug checks catch non-finite values") {
    set_debug_checks(true);
    CHECK_THROWS_AS(scale(TD::from({1}, {1e308}), 10.0), Error);
    set_debug_checks(false);
    CHECK_NOTHROW(scale(TD::from({1}, {1e308}), 10.0));
  }
}

TEST_CASE("every primitive matches finite differences") {
  for (const auto& c : testing::primitive_cases()) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Rng rng(1000 + seed);
      auto [fn, inputs] = c.make(rng);
      worst = std::max(worst, check_gradients(fn, inputs).max_relative_error);
    }
    INFO(c.name << " worst relative error " << worst);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("adamw") {
  SUBCASE("zero gradient and zero decay leave parameters unchanged") {
    ParameterStore<double> store;
    auto p = store.add("p", {3}, true);
    for (double& v : p.data()) v = 0.25;
    p.zero_grad();
    AdamW<double> opt(store, {0.9, 0.999, 1e-8, 0.0});
    opt.step(0.1);
    for (double v : p.data()) CHECK(v == 0.25);
  }
  SUBCASE("single step matches the hand computation") {
    // numeric_oracles.py: p=1, g=0.5, lr=0.1, betas (0.9, 0.999), eps 1e-8.
    for (auto [wd, expected] : {std::pair{0.0, 0.900000002}, std::pair{0.01, 0.899000002}}) {
      ParameterStore<double> store;
      auto p = store.add("p", {1}, true);
      p.data()[0] = 1.0;
      p.mutable_grad()[0] = 0.5;
      AdamW<double> opt(store, {0.9, 0.999, 1e-8, wd});
      opt.step(0.1);
      CHECK(std::abs(p.data()[0] - expected) < 1e-12);
    }
  }
  SUBCASE("decoupled decay shrinks by 1 - lr * wd") {
    ParameterStore<double> store;
    auto p = store.add("p", {2}, true);
    auto q = store.add("q", {2}, false);
    p.data()[0] = 2.0;
    p.data()[1] = -4.0;
    q.data()[0] = 2.0;
    store.zero_grad();
    AdamW<double> opt(store, {0.9, 0.98, 1e-8, 0.1});
    opt.step(0.01);
    CHECK(p.data()[0] == doctest::Approx(2.0 * (1 - 0.01 * 0.1)).epsilon(1e-15));
    CHECK(p.data()[1] == doctest::Approx(-4.0 * (1 - 0.01 * 0.1)).epsilon(1e-15));
    CHECK(q.data()[0] == 2.0);
  }
  SUBCASE("missing gradient is an optimizer error") {
    ParameterStore<float> store;
    store.add("p", {2}, true);
    AdamW<float> opt(store, {});
    try {
      opt.step(0.1);
      FAIL("expected OptimizerError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kOptimizerError);
    }
  }
  SUBCASE("state round trips through disk") {
    testing::TempDir dir("adam");
    Rng rng(1);
    ParameterStore<float> a;
    auto lin = make_linear(a, "l", 3, 2, rng, 0.5);
    for (auto& e : a.entries()) {
      for (float& g : e.tensor.mutable_grad()) g = static_cast<float>(rng.normal());
    }
    AdamW<float> opt(a, {});
    opt.step(1e-2);
    save_parameters(dir / "w.clmw", a);
    opt.save(dir / "w.opt");

    ParameterStore<float> b;
    Rng rng2(99);
    make_linear(b, "l", 3, 2, rng2, 0.5);
    load_parameters(dir / "w.clmw", b);
    AdamW<float> opt_b(b, {});
    opt_b.load(dir / "w.opt");
    CHECK(opt_b.step_count() == 1);
    for (std::size_t k = 0; k < a.entries().size(); ++k) {
      auto& pa = a.entries()[k].tensor;
      auto& pb = b.entries()[k].tensor;
      for (std::size_t i = 0; i < pa.numel(); ++i) pb.mutable_grad()[i] = pa.grad()[i];
    }
    opt.step(1e-2);
    opt_b.step(1e-2);
    for (std::size_t k = 0; k < a.entries().size(); ++k) {
      const auto da = a.entries()[k].tensor.data();
      const auto db = b.entries()[k].tensor.data();
      CHECK(std::equal(da.begin(), da.end(), db.begin()));
    }
  }
}

TEST_CASE("gradient clipping") {
  ParameterStore<double> store;
  auto p = store.add("p", {2}, true);
  p.mutable_grad()[0] = 3.0;
  p.mutable_grad()[1] = 4.0;
  CHECK(clip_grad_norm(store, 1.0) == doctest::Approx(5.0));
  const double n = std::hypot(p.grad()[0], p.grad()[1]);
  CHECK(n == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(clip_grad_norm(store, 10.0) == doctest::Approx(n));
}

TEST_CASE("learning rate schedule") {
  LrSchedule s{4e-4, 10000, 250000, 1e-5};
  s.validate();
  CHECK(s.lr_at(0) == 0.0);
  CHECK(s.lr_at(5000) == doctest::Approx(2e-4).epsilon(1e-15));
  CHECK(s.lr_at(10000) == 4e-4);
  CHECK(s.lr_at(250000) == 1e-5);
  CHECK(s.lr_at(300000) == 1e-5);
  // numeric_oracles.py midpoint value.
  CHECK(std::abs(s.lr_at(130000) - 0.000205) < 1e-15);
  const double independent = 1e-5 + (4e-4 - 1e-5) * std::pow(std::cos(std::numbers::pi / 4), 2);
  CHECK(std::abs(s.lr_at(130000) - independent) < 1e-15);

  LrSchedule no_warmup{1e-5, 0, 20000, 0.0};
  CHECK(no_warmup.lr_at(0) == 1e-5);
  CHECK(no_warmup.lr_at(20000) == 0.0);
  CHECK_THROWS((LrSchedule{1e-3, 10, 5, 0.0}.validate()));
  CHECK_THROWS((LrSchedule{1e-3, 1, 5, 1e-2}.validate()));
}

TEST_CASE("checkpoint format") {
  testing::TempDir dir("ckpt");
  ParameterStore<float> store;
  auto w = store.add("layer.weight", {2, 3}, true);
  for (std::size_t i = 0; i < 6; ++i) w.data()[i] = static_cast<float>(i) * 0.5f;
  save_parameters(dir / "m.clmw", store);

  std::ifstream in(dir / "m.clmw", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 4 + 4 + 4 + 4 + 12 + 4 + 16 + 24);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "CLMW");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 1);
  CHECK(bytes[12] == 12);
  CHECK(bytes[28] == 2);
  CHECK(bytes[32] == 2);
  CHECK(bytes[40] == 3);

  ParameterStore<float> other;
  other.add("layer.weight", {3, 2}, true);
  CHECK_THROWS_AS(load_parameters(dir / "m.clmw", other), Error);
  ParameterStore<float> same;
  auto w2 = same.add("layer.weight", {2, 3}, true);
  load_parameters(dir / "m.clmw", same);
  CHECK(w2.data()[5] == 2.5f);
}
