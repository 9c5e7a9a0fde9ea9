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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "clm/nn/parameters.hpp"

namespace clm::nn {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  double weight_decay = 0.1;

  void validate() const;
};

// Decoupled weight decay Adam. Decay applies only to parameters registered
// with decay = true:
//   p <- p * (1 - lr * wd)
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
template <typename T>
class AdamW {
 public:
  AdamW(ParameterStore<T>& params, AdamWConfig config);

  // Throws OptimizerError if a parameter has no gradient buffer or a
  // non-finite gradient.
  void step(double lr);

  std::uint64_t step_count() const { return step_; }
  const AdamWConfig& config() const { return config_; }

  // Moment buffers plus the step counter. The file must come from a store
  // with the same parameter names and sizes.
  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  ParameterStore<T>& params_;
  AdamWConfig config_;
  std::vector<std::vector<T>> m_;
  std::vector<std::vector<T>> v_;
  std::uint64_t step_ = 0;
};

// Scales all gradients so their joint L2 norm is at most max_norm. Returns
// the norm before clipping. max_norm <= 0 disables clipping.
template <typename T>
double clip_grad_norm(ParameterStore<T>& params, double max_norm);

// Linear warmup to peak, cosine decay to floor at total_steps, floor after.
struct LrSchedule {
  double peak_lr = 4e-4;
  std::uint64_t warmup_steps = 10000;
  std::uint64_t total_steps = 250000;
  double floor_lr = 0.0;

  void validate() const;
  double lr_at(std::uint64_t step) const;
};

}  // namespace clm::nn
