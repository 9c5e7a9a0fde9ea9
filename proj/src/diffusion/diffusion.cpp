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

#include "clm/diffusion/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "clm/common/error.hpp"
#include "clm/common/rng.hpp"

namespace clm {
namespace {

double population_std(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(v.size()));
}

void require_finite(std::span<const float> v, std::size_t step, const char* what) {
  for (float x : v) {
    if (!std::isfinite(x)) {
      fail(ErrorCode::kNumericalError, std::string("non-finite ") + what + " at sampler step " + std::to_string(step));
    }
  }
}

std::vector<float> initial_noise(std::size_t dim, double sigma_init, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> x(dim);
  for (float& v : x) v = static_cast<float>(sigma_init * rng.normal());
  return x;
}

// One deterministic update from timestep t to `next` (or none) given the x0
// estimate. Returns the new state; epsilon_factor multiplies the epsilon.
std::vector<float> ddim_update(const NoiseSchedule& schedule, std::span<const float> x, std::span<const float> x0,
                               std::size_t t, std::size_t next, double epsilon_factor) {
  const double ab = schedule.alpha_bar(t);
  const double ab_next = schedule.alpha_bar(next);
  const double sa = std::sqrt(ab), ss = std::sqrt(1.0 - ab);
  const double sa_next = std::sqrt(ab_next), ss_next = std::sqrt(1.0 - ab_next);
  std::vector<float> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double eps = (static_cast<double>(x[i]) - sa * x0[i]) / ss * epsilon_factor;
    out[i] = static_cast<float>(sa_next * x0[i] + ss_next * eps);
  }
  return out;
}

}  // namespace

NoiseSchedule::NoiseSchedule(std::size_t t_train, double offset) {
  if (t_train == 0) fail(ErrorCode::kInvalidConfig, "t_train must be positive");
  if (!(offset > 0.0)) fail(ErrorCode::kInvalidConfig, "cosine schedule offset must be positive");
  const double n = static_cast<double>(t_train);
  auto f = [&](double t) {
    const double c = std::cos((t / n + offset) / (1.0 + offset) * std::numbers::pi / 2.0);
    return c * c;
  };
  alpha_bar_.resize(t_train);
  double prod = 1.0;
  for (std::size_t t = 0; t < t_train; ++t) {
    const double beta = std::min(1.0 - f(static_cast<double>(t + 1)) / f(static_cast<double>(t)), 0.999);
    prod *= 1.0 - beta;
    alpha_bar_[t] = prod;
  }
}

double NoiseSchedule::alpha_bar(std::size_t t) const {
  if (t >= alpha_bar_.size()) {
    fail(ErrorCode::kBadTimestep, "timestep " + std::to_string(t) + " outside [0, " +
                                      std::to_string(alpha_bar_.size()) + ")");
  }
  return alpha_bar_[t];
}

double NoiseSchedule::sigma(std::size_t t) const { return std::sqrt(1.0 - alpha_bar(t)); }

std::vector<float> q_sample(const NoiseSchedule& schedule, std::span<const float> x0, std::size_t t,
                            std::span<const float> noise) {
  if (x0.size() != noise.size()) fail(ErrorCode::kDimensionMismatch, "q_sample: noise and x0 sizes differ");
  const double a = std::sqrt(schedule.alpha_bar(t));
  const double s = schedule.sigma(t);
  std::vector<float> out(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) out[i] = static_cast<float>(a * x0[i] + s * noise[i]);
  return out;
}

void SamplerParams::validate() const {
  if (steps == 0) fail(ErrorCode::kInvalidConfig, "sampler steps must be >= 1");
  if (!(sigma_init > 0.0)) fail(ErrorCode::kInvalidConfig, "sigma_init must be positive");
  if (!(epsilon_scaling > 0.0)) fail(ErrorCode::kInvalidConfig, "epsilon scaling must be positive");
  if (!(guidance_rescale >= 0.0 && guidance_rescale <= 1.0)) {
    fail(ErrorCode::kInvalidConfig, "guidance rescale must lie in [0, 1]");
  }
  if (!std::isfinite(guidance_scale)) fail(ErrorCode::kInvalidConfig, "guidance scale must be finite");
}

std::vector<float> guide_batch(std::span<const float> cond, std::span<const float> uncond, std::size_t dim,
                               double g, double phi, RescaleStdMode mode, GuideDiagnostics* diagnostics) {
  if (cond.size() != uncond.size()) fail(ErrorCode::kDimensionMismatch, "guide: branch sizes differ");
  if (dim == 0 || cond.size() % dim != 0 || cond.empty()) fail(ErrorCode::kDimensionMismatch, "guide: bad row width");
  if (diagnostics) *diagnostics = {};
  if (g == 1.0) return {cond.begin(), cond.end()};

  std::vector<double> cfg(cond.size()), c(cond.begin(), cond.end());
  for (std::size_t i = 0; i < cfg.size(); ++i) cfg[i] = uncond[i] + g * (static_cast<double>(cond[i]) - uncond[i]);
  std::vector<float> out(cfg.size());
  if (phi == 0.0) {
    std::transform(cfg.begin(), cfg.end(), out.begin(), [](double v) { return static_cast<float>(v); });
    return out;
  }
  const std::size_t group = mode == RescaleStdMode::kPerVector ? dim : cfg.size();
  for (std::size_t start = 0; start < cfg.size(); start += group) {
    const std::span<const double> cfg_g(cfg.data() + start, group);
    const double std_cfg = population_std(cfg_g);
    if (std_cfg == 0.0) {
      if (diagnostics) diagnostics->rescale_skipped = true;
      for (std::size_t i = start; i < start + group; ++i) out[i] = static_cast<float>(cfg[i]);
      continue;
    }
    const double ratio = population_std(std::span<const double>(c.data() + start, group)) / std_cfg;
    for (std::size_t i = start; i < start + group; ++i) {
      out[i] = static_cast<float>(phi * (cfg[i] * ratio) + (1.0 - phi) * cfg[i]);
    }
  }
  return out;
}

std::vector<float> guide(std::span<const float> cond, std::span<const float> uncond, double g, double phi,
                         GuideDiagnostics* diagnostics) {
  return guide_batch(cond, uncond, cond.size(), g, phi, RescaleStdMode::kPerVector, diagnostics);
}

std::vector<std::size_t> inference_timesteps(std::size_t t_train, std::size_t steps) {
  if (steps == 0 || steps > t_train) {
    fail(ErrorCode::kInvalidConfig, "inference steps must lie in [1, t_train=" + std::to_string(t_train) + "]");
  }
  std::vector<std::size_t> out(steps);
  if (steps == 1) {
    out[0] = t_train - 1;
    return out;
  }
  const double top = static_cast<double>(t_train - 1);
  for (std::size_t i = 0; i < steps; ++i) {
    const double v = top - top * static_cast<double>(i) / static_cast<double>(steps - 1);
    out[i] = static_cast<std::size_t>(std::llround(v));
  }
  return out;
}

std::vector<float> sample_next_concept(std::size_t dim, const NoiseSchedule& schedule, const SamplerParams& params,
                                       const DenoiseFn& conditional, const DenoiseFn& unconditional,
                                       SampleTrace* trace) {
  params.validate();
  const auto timesteps = inference_timesteps(schedule.t_train(), params.steps);
  if (trace) *trace = {timesteps, 0};
  const double eps_factor = params.epsilon_mode == EpsilonScalingMode::kDivide ? 1.0 / params.epsilon_scaling
                                                                              : params.epsilon_scaling;
  std::vector<float> x = initial_noise(dim, params.sigma_init, params.seed);
  for (std::size_t k = 0; k < timesteps.size(); ++k) {
    const std::size_t t = timesteps[k];
    std::vector<float> x0 = conditional(x, t);
    if (x0.size() != dim) fail(ErrorCode::kDimensionMismatch, "denoiser returned the wrong dimension");
    if (params.guidance_scale != 1.0) {
      const std::vector<float> x0_uncond = unconditional(x, t);
      if (x0_uncond.size() != dim) fail(ErrorCode::kDimensionMismatch, "denoiser returned the wrong dimension");
      GuideDiagnostics diag;
      x0 = guide_batch(x0, x0_uncond, dim, params.guidance_scale, params.guidance_rescale, params.rescale_mode, &diag);
      if (trace && diag.rescale_skipped) ++trace->guidance_rescale_skips;
    }
    require_finite(x0, k, "x0 estimate");
    if (k + 1 == timesteps.size()) return x0;
    x = ddim_update(schedule, x, x0, t, timesteps[k + 1], eps_factor);
    require_finite(x, k, "sampler state");
  }
  return x;  // unreachable: steps >= 1
}

std::vector<float> sample_unguided(std::size_t dim, const NoiseSchedule& schedule, std::size_t steps,
                                   double sigma_init, std::uint64_t seed, const DenoiseFn& conditional) {
  const auto timesteps = inference_timesteps(schedule.t_train(), steps);
  std::vector<float> x = initial_noise(dim, sigma_init, seed);
  for (std::size_t k = 0; k < timesteps.size(); ++k) {
    std::vector<float> x0 = conditional(x, timesteps[k]);
    if (k + 1 == timesteps.size()) return x0;
    x = ddim_update(schedule, x, x0, timesteps[k], timesteps[k + 1], 1.0);
  }
  return x;
}

}  // namespace clm
