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

#include "clm/common/error.hpp"
#include "clm/common/rng.hpp"
#include "clm/diffusion/diffusion.hpp"
#include "clm/generate/generator.hpp"
#include "clm/model/two_tower.hpp"

using namespace clm;

namespace {

// Stand-in denoisers with distinct, timestep-dependent outputs.
std::vector<float> stub_cond(std::span<const float> x, std::size_t t) {
  std::vector<float> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = static_cast<float>(0.5 * x[i] + 0.01 * static_cast<double>(t) + 0.2 * static_cast<double>(i));
  }
  return out;
}

std::vector<float> stub_uncond(std::span<const float> x, std::size_t t) {
  std::vector<float> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<float>(0.3 * x[i] - 0.002 * static_cast<double>(t));
  return out;
}

std::vector<float> start_noise(std::size_t dim, double sigma_init, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> x(dim);
  for (float& v : x) v = static_cast<float>(sigma_init * rng.normal());
  return x;
}

// Guided deterministic sampler written out from the update rule, with no
// epsilon scaling step at all.
std::vector<float> reference_sampler(std::size_t dim, const NoiseSchedule& sched, const SamplerParams& p) {
  const auto ts = inference_timesteps(sched.t_train(), p.steps);
  std::vector<float> x = start_noise(dim, p.sigma_init, p.seed);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const auto x0 = guide(stub_cond(x, ts[k]), stub_uncond(x, ts[k]), p.guidance_scale, p.guidance_rescale);
    if (k + 1 == ts.size()) return x0;
    const double sa = std::sqrt(sched.alpha_bar(ts[k])), ss = std::sqrt(1.0 - sched.alpha_bar(ts[k]));
    const double sn = std::sqrt(sched.alpha_bar(ts[k + 1])), sns = std::sqrt(1.0 - sched.alpha_bar(ts[k + 1]));
    for (std::size_t i = 0; i < dim; ++i) {
      const double eps = (static_cast<double>(x[i]) - sa * x0[i]) / ss;
      x[i] = static_cast<float>(sn * x0[i] + sns * eps);
    }
  }
  return x;
}

const std::vector<float> kCond = {1.0f, 2.0f, 3.0f, 4.0f};
const std::vector<float> kUncond = {0.5f, 1.0f, -1.0f, 2.0f};

}  // namespace

TEST_CASE("cosine schedule shape") {
  const NoiseSchedule sched(100);
  CHECK(sched.t_train() == 100);
  CHECK(sched.alpha_bar(0) > 0.99);
  CHECK(sched.alpha_bar(0) <= 1.0);
  for (std::size_t t = 1; t < 100; ++t) {
    CHECK(sched.alpha_bar(t) < sched.alpha_bar(t - 1));
    CHECK(sched.alpha_bar(t) > 0.0);
  }
  CHECK_THROWS_AS(sched.alpha_bar(100), Error);
}

TEST_CASE("forward noising") {
  const NoiseSchedule sched(100);
  const std::vector<float> x0 = {0.25f, -1.5f, 2.0f};
  SUBCASE("first timestep keeps the signal") {
    const auto xt = q_sample(sched, x0, 0, std::vector<float>{0.1f, -0.2f, 0.3f});
    for (std::size_t i = 0; i < 3; ++i) CHECK(xt[i] == doctest::Approx(x0[i]).epsilon(0.05));
  }
  SUBCASE("zero noise scales the signal exactly") {
    for (std::size_t t : {0, 17, 99}) {
      const auto xt = q_sample(sched, x0, t, std::vector<float>(3, 0.0f));
      for (std::size_t i = 0; i < 3; ++i) CHECK(xt[i] == static_cast<float>(std::sqrt(sched.alpha_bar(t)) * x0[i]));
    }
  }
  SUBCASE("variance of pure noise matches the schedule") {
    Rng rng(77);
    for (std::size_t t : {10, 50, 90}) {
      double sum = 0.0, sq = 0.0;
      for (int n = 0; n < 10000; ++n) {
        const float noise = static_cast<float>(rng.normal());
        const float v = q_sample(sched, std::vector<float>{0.0f}, t, std::vector<float>{noise})[0];
        sum += v;
        sq += static_cast<double>(v) * v;
      }
      const double mean = sum / 10000.0;
      const double var = sq / 10000.0 - mean * mean;
      CHECK(std::abs(var / (1.0 - sched.alpha_bar(t)) - 1.0) < 0.05);
    }
  }
  CHECK_THROWS_AS(q_sample(sched, x0, 100, std::vector<float>(3, 0.0f)), Error);
  CHECK_THROWS_AS(q_sample(sched, x0, 5, std::vector<float>(2, 0.0f)), Error);
}

TEST_CASE("guidance combination against direct formula evaluation") {
  SUBCASE("scale 2 with full rescale") {
    const std::vector<double> expected = {0.7559289460184545, 1.511857892036909, 3.527668414752788,
                                          3.023715784073818};
    const auto out = guide(kCond, kUncond, 2.0, 1.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(out[i] == doctest::Approx(expected[i]).epsilon(1e-6));
  }
  SUBCASE("scale 3 with rescale 0.7") {
    const std::vector<double> expected = {1.0483588306542442, 2.0967176613084884, 5.765973568598342,
                                          4.193435322616977};
    const auto out = guide(kCond, kUncond, 3.0, 0.7);
    for (std::size_t i = 0; i < 4; ++i) CHECK(out[i] == doctest::Approx(expected[i]).epsilon(1e-6));
  }
  SUBCASE("scale 1 returns the conditional prediction for any rescale") {
    for (double phi : {0.0, 0.3, 0.7, 1.0}) CHECK(guide(kCond, kUncond, 1.0, phi) == kCond);
  }
  SUBCASE("rescale 0 is the plain combination") {
    const auto out = guide(kCond, kUncond, 3.0, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(out[i] == static_cast<float>(kUncond[i] + 3.0 * (static_cast<double>(kCond[i]) - kUncond[i])));
    }
  }
  SUBCASE("zero spread skips the rescale and says so") {
    GuideDiagnostics diag;
    const std::vector<float> c = {1.0f, 1.0f, 1.0f}, u = {0.0f, 0.0f, 0.0f};
    const auto out = guide(c, u, 2.0, 0.7, &diag);
    CHECK(diag.rescale_skipped);
    CHECK(out == std::vector<float>{2.0f, 2.0f, 2.0f});
  }
  SUBCASE("per-batch rescale pools both rows") {
    std::vector<float> c2 = kCond, u2 = kUncond;
    c2.insert(c2.end(), kCond.begin(), kCond.end());
    u2.insert(u2.end(), kUncond.begin(), kUncond.end());
    // Two identical rows have the same pooled std as one row.
    const auto pooled = guide_batch(c2, u2, 4, 2.0, 1.0, RescaleStdMode::kPerBatch);
    const auto single = guide(kCond, kUncond, 2.0, 1.0);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(pooled[i] == doctest::Approx(single[i]).epsilon(1e-6));
      CHECK(pooled[4 + i] == doctest::Approx(single[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("inference timesteps are strictly decreasing inside the training range") {
  const auto ts = inference_timesteps(100, 40);
  REQUIRE(ts.size() == 40);
  CHECK(ts.front() == 99);
  CHECK(ts.back() == 0);
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] < ts[i - 1]);
  CHECK(inference_timesteps(100, 1) == std::vector<std::size_t>{99});
  CHECK(inference_timesteps(10, 10).size() == 10);
  CHECK_THROWS_AS(inference_timesteps(10, 11), Error);
}

TEST_CASE("sampler degeneracies") {
  const NoiseSchedule sched(100);
  SamplerParams p;
  p.seed = 123;

  SUBCASE("equal seeds give identical outputs") {
    CHECK(sample_next_concept(6, sched, p, stub_cond, stub_uncond) ==
          sample_next_concept(6, sched, p, stub_cond, stub_uncond));
    SamplerParams q = p;
    q.seed = 124;
    CHECK(sample_next_concept(6, sched, q, stub_cond, stub_uncond) !=
          sample_next_concept(6, sched, p, stub_cond, stub_uncond));
  }
  SUBCASE("unit guidance and unit epsilon scaling reduce to conditional sampling") {
    p.guidance_scale = 1.0;
    p.epsilon_scaling = 1.0;
    for (double phi : {0.0, 0.7}) {
      p.guidance_rescale = phi;
      bool uncond_called = false;
      const DenoiseFn spy = [&](std::span<const float> x, std::size_t t) {
        uncond_called = true;
        return stub_uncond(x, t);
      };
      const auto guided = sample_next_concept(6, sched, p, stub_cond, spy);
      CHECK_FALSE(uncond_called);
      CHECK(guided == sample_unguided(6, sched, p.steps, p.sigma_init, p.seed, stub_cond));
    }
  }
  SUBCASE("unit epsilon scaling is an exact no-op") {
    p.epsilon_scaling = 1.0;
    for (auto mode : {EpsilonScalingMode::kDivide, EpsilonScalingMode::kMultiply}) {
      p.epsilon_mode = mode;
      CHECK(sample_next_concept(6, sched, p, stub_cond, stub_uncond) == reference_sampler(6, sched, p));
    }
  }
  SUBCASE("non-unit epsilon scaling changes the trajectory") {
    CHECK(sample_next_concept(6, sched, p, stub_cond, stub_uncond) != reference_sampler(6, sched, p));
  }
  SUBCASE("a single step returns the guided estimate at the top timestep") {
    p.steps = 1;
    SampleTrace trace;
    const auto out = sample_next_concept(6, sched, p, stub_cond, stub_uncond, &trace);
    CHECK(trace.timesteps == std::vector<std::size_t>{99});
    const auto x = start_noise(6, 0.6, 123);
    CHECK(out == guide(stub_cond(x, 99), stub_uncond(x, 99), 3.0, 0.7));
  }
  SUBCASE("non-finite estimates are reported") {
    const DenoiseFn broken = [](std::span<const float> x, std::size_t) {
      return std::vector<float>(x.size(), std::numeric_limits<float>::quiet_NaN());
    };
    try {
      sample_next_concept(6, sched, p, broken, stub_uncond);
      FAIL("expected NumericalError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNumericalError);
      CHECK(std::string(e.what()).find("step 0") != std::string::npos);
    }
  }
}

TEST_CASE("sampler parameter validation") {
  SamplerParams p;
  p.steps = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.sigma_init = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.guidance_rescale = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.epsilon_scaling = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("model-driven sampling stays finite over 1000 random contexts") {
  ModelConfig c;
  c.d_embedding = 8;
  c.d_model = 16;
  c.n_ctx_layers = 1;
  c.n_den_layers = 1;
  c.n_heads = 2;
  c.max_positions = 8;
  const TwoTowerModel<float> model(c, 5);
  const NoiseSchedule sched(c.t_train);
  const DiffusionPredictor predictor(model, sched, SamplerParams{});
  Rng rng(2024);
  std::size_t non_finite = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Embedding> ctx(1 + rng.uniform_int(4));
    for (auto& e : ctx) {
      std::vector<float> v(8);
      for (float& x : v) x = static_cast<float>(rng.normal());
      e = Embedding(std::move(v));
    }
    const Embedding out = predictor.predict(ctx, static_cast<std::uint64_t>(trial));
    for (std::size_t i = 0; i < out.dimension(); ++i) non_finite += std::isfinite(out[i]) ? 0 : 1;
  }
  CHECK(non_finite == 0);
}
