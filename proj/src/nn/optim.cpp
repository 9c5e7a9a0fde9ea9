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

#include "clm/nn/optim.hpp"

#include <cmath>
#include <numbers>

#include "clm/common/binary_io.hpp"
#include "clm/common/error.hpp"

namespace clm::nn {
namespace {

// Same container as the parameter checkpoint: moment tensors named
// "m.<param>" and "v.<param>", then a trailing u64 step counter.
constexpr std::string_view kMagic = "CLMW";
constexpr std::uint32_t kVersion = 1;

}  // namespace

void AdamWConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) fail(ErrorCode::kInvalidConfig, "adam eps must be positive");
  if (!(weight_decay >= 0.0)) fail(ErrorCode::kInvalidConfig, "weight decay must be >= 0");
}

template <typename T>
AdamW<T>::AdamW(ParameterStore<T>& params, AdamWConfig config) : params_(params), config_(config) {
  config_.validate();
  for (const auto& p : params_.entries()) {
    m_.emplace_back(p.tensor.numel(), T(0));
    v_.emplace_back(p.tensor.numel(), T(0));
  }
}

template <typename T>
void AdamW<T>::step(double lr) {
  auto& entries = params_.entries();
  if (entries.size() != m_.size()) fail(ErrorCode::kOptimizerError, "parameter set changed after optimizer creation");
  for (const auto& p : entries) {
    if (!p.tensor.has_grad()) fail(ErrorCode::kOptimizerError, "parameter " + p.name + " has no gradient");
    for (T g : p.tensor.grad()) {
      if (!std::isfinite(g)) fail(ErrorCode::kOptimizerError, "non-finite gradient in " + p.name);
    }
  }
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t k = 0; k < entries.size(); ++k) {
    auto& p = entries[k];
    auto values = p.tensor.data();
    const auto grads = p.tensor.grad();
    const double decay = p.decay ? 1.0 - lr * config_.weight_decay : 1.0;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[i];
      const double mi = b1 * m[i] + (1.0 - b1) * g;
      const double vi = b2 * v[i] + (1.0 - b2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = (mi / bc1) / (std::sqrt(vi / bc2) + config_.eps);
      values[i] = static_cast<T>(static_cast<double>(values[i]) * decay - lr * update);
    }
  }
}

template <typename T>
void AdamW<T>::save(const std::filesystem::path& path) const {
  const auto& entries = params_.entries();
  binio::write_atomically(path, [&](std::ostream& out) {
    binio::write_magic(out, kMagic);
    binio::write_u32(out, kVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(2 * entries.size()));
    for (std::size_t k = 0; k < entries.size(); ++k) {
      for (int which = 0; which < 2; ++which) {
        const auto& buf = which == 0 ? m_[k] : v_[k];
        binio::write_string(out, (which == 0 ? "m." : "v.") + entries[k].name);
        const Shape& shape = entries[k].tensor.shape();
        binio::write_u32(out, static_cast<std::uint32_t>(shape.size()));
        for (std::size_t d : shape) binio::write_u64(out, d);
        std::vector<float> f(buf.begin(), buf.end());
        binio::write_f32s(out, f);
      }
    }
    binio::write_u64(out, step_);
  });
}

template <typename T>
void AdamW<T>::load(const std::filesystem::path& path) {
  const auto& entries = params_.entries();
  auto in = binio::open_input(path, "optimizer state");
  binio::expect_magic(in, kMagic, "optimizer state");
  if (binio::read_u32(in) != kVersion) fail(ErrorCode::kFormatError, "unsupported optimizer state version");
  if (binio::read_u32(in) != 2 * entries.size()) {
    fail(ErrorCode::kFormatError, "optimizer state does not match the parameter set");
  }
  for (std::size_t k = 0; k < entries.size(); ++k) {
    for (int which = 0; which < 2; ++which) {
      const std::string expected = (which == 0 ? "m." : "v.") + entries[k].name;
      if (binio::read_string(in) != expected) {
        fail(ErrorCode::kFormatError, "optimizer state entry order mismatch at " + expected);
      }
      Shape shape(binio::read_u32(in));
      for (auto& d : shape) d = binio::read_u64(in);
      if (shape != entries[k].tensor.shape()) fail(ErrorCode::kFormatError, "optimizer state shape mismatch at " + expected);
      const auto values = binio::read_f32s(in, entries[k].tensor.numel());
      auto& buf = which == 0 ? m_[k] : v_[k];
      buf.assign(values.begin(), values.end());
    }
  }
  step_ = binio::read_u64(in);
  if (!binio::at_eof(in)) fail(ErrorCode::kFormatError, "trailing bytes in optimizer state");
}

template <typename T>
double clip_grad_norm(ParameterStore<T>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params.entries()) {
    for (T g : p.tensor.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / (norm + 1e-6);
    for (auto& p : params.entries()) {
      if (!p.tensor.has_grad()) continue;
      for (T& g : p.tensor.mutable_grad()) g = static_cast<T>(g * factor);
    }
  }
  return norm;
}

void LrSchedule::validate() const {
  if (!(peak_lr > 0.0)) fail(ErrorCode::kInvalidConfig, "peak learning rate must be positive");
  if (total_steps == 0) fail(ErrorCode::kInvalidConfig, "total steps must be positive");
  if (warmup_steps > total_steps) fail(ErrorCode::kInvalidConfig, "warmup steps exceed total steps");
  if (!(floor_lr >= 0.0) || floor_lr > peak_lr) fail(ErrorCode::kInvalidConfig, "floor lr must lie in [0, peak]");
}

double LrSchedule::lr_at(std::uint64_t step) const {
  if (warmup_steps > 0 && step <= warmup_steps) {
    return peak_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  }
  if (step >= total_steps) return floor_lr;
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  return floor_lr + (peak_lr - floor_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template class AdamW<float>;
template class AdamW<double>;
template double clip_grad_norm(ParameterStore<float>&, double);
template double clip_grad_norm(ParameterStore<double>&, double);

}  // namespace clm::nn
