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

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace clm {

// Cosine cumulative-signal schedule over t_train discrete timesteps.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(std::size_t t_train, double offset = 0.008);

  std::size_t t_train() const { return alpha_bar_.size(); }
  double alpha_bar(std::size_t t) const;
  double sigma(std::size_t t) const;  // sqrt(1 - alpha_bar)
  const std::vector<double>& alpha_bars() const { return alpha_bar_; }

 private:
  std::vector<double> alpha_bar_;
};

// x_t = sqrt(alpha_bar[t]) * x0 + sqrt(1 - alpha_bar[t]) * noise
std::vector<float> q_sample(const NoiseSchedule& schedule, std::span<const float> x0, std::size_t t,
                            std::span<const float> noise);

enum class EpsilonScalingMode { kDivide, kMultiply };
enum class RescaleStdMode { kPerVector, kPerBatch };

struct SamplerParams {
  std::size_t steps = 40;
  double sigma_init = 0.6;
  double guidance_scale = 3.0;
  double guidance_rescale = 0.7;
  double epsilon_scaling = 1.00045;
  std::uint64_t seed = 0;
  EpsilonScalingMode epsilon_mode = EpsilonScalingMode::kDivide;
  RescaleStdMode rescale_mode = RescaleStdMode::kPerVector;

  void validate() const;
};

struct GuideDiagnostics {
  bool rescale_skipped = false;  // std of the cfg combination was zero
};

// cfg = uncond + g (cond - uncond); rescaled = cfg * std(cond) / std(cfg);
// out = phi * rescaled + (1 - phi) * cfg. g == 1 returns cond exactly.
std::vector<float> guide(std::span<const float> cond, std::span<const float> uncond, double g, double phi,
                         GuideDiagnostics* diagnostics = nullptr);

// Batched form: rows of `cond`/`uncond` are [rows, dim] row-major. With
// kPerBatch the std is taken over all rows jointly.
std::vector<float> guide_batch(std::span<const float> cond, std::span<const float> uncond, std::size_t dim,
                               double g, double phi, RescaleStdMode mode, GuideDiagnostics* diagnostics = nullptr);

// Evenly spaced descending timesteps covering [0, t_train).
std::vector<std::size_t> inference_timesteps(std::size_t t_train, std::size_t steps);

// Predicts clean embeddings for `x` at timestep t. The first callback is the
// context-conditioned branch, the second the unconditional one.
using DenoiseFn = std::function<std::vector<float>(std::span<const float> x, std::size_t t)>;

struct SampleTrace {
  std::vector<std::size_t> timesteps;
  std::size_t guidance_rescale_skips = 0;
};

// Deterministic DDIM-style sampler. Starts from sigma_init * N(0, I) drawn
// from `seed`; at each step combines the two branches with guide(), turns
// the x0 estimate into epsilon form, applies epsilon scaling and moves to
// the next timestep without fresh noise. Returns the final x0 estimate.
// With guidance_scale == 1 the unconditional branch is never evaluated.
std::vector<float> sample_next_concept(std::size_t dim, const NoiseSchedule& schedule, const SamplerParams& params,
                                       const DenoiseFn& conditional, const DenoiseFn& unconditional,
                                       SampleTrace* trace = nullptr);

// Same update rule with every guidance code path removed; used to verify
// that g = 1, phi = 0, lambda = 1 reduces to plain conditional sampling.
std::vector<float> sample_unguided(std::size_t dim, const NoiseSchedule& schedule, std::size_t steps,
                                   double sigma_init, std::uint64_t seed, const DenoiseFn& conditional);

}  // namespace clm
