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

#include "clm/model/two_tower.hpp"

#include <cmath>

#include "clm/common/error.hpp"
#include "clm/nn/ops.hpp"

namespace clm {

using nn::Tensor;

void ModelConfig::validate() const {
  if (d_embedding == 0 || d_model == 0 || n_ctx_layers == 0 || n_den_layers == 0 || n_heads == 0 ||
      max_positions == 0 || t_train == 0) {
    fail(ErrorCode::kInvalidConfig, "model dimensions and counts must all be >= 1");
  }
  if (d_model % n_heads != 0) {
    fail(ErrorCode::kInvalidConfig, "d_model " + std::to_string(d_model) + " is not divisible by n_heads " +
                                        std::to_string(n_heads));
  }
  if (!(cfg_drop_prob >= 0.0 && cfg_drop_prob < 1.0)) {
    fail(ErrorCode::kInvalidConfig, "cfg_drop_prob must lie in [0, 1)");
  }
  if (!(init_std > 0.0)) fail(ErrorCode::kInvalidConfig, "init_std must be positive");
}

std::size_t ModelConfig::analytic_parameter_count() const {
  const std::size_t d = d_embedding, m = d_model;
  const std::size_t linear_mm = m * m + m;
  const std::size_t attention = 4 * linear_mm;
  const std::size_t mlp = (m * 4 * m + 4 * m) + (4 * m * m + m);
  const std::size_t ctx = (d * m + m) + max_positions * m + n_ctx_layers * (2 * m + attention + 2 * m + mlp);
  const std::size_t den = (d * m + m) + (max_positions + 1) * m + m + 2 * linear_mm +
                          n_den_layers * ((m * 6 * m + 6 * m) + 2 * m + attention + mlp) + (m * 2 * m + 2 * m) +
                          (m * d + d);
  return ctx + den;
}

template <typename T>
TwoTowerModel<T>::TwoTowerModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  Rng rng(seed);
  const std::size_t d = config_.d_embedding, m = config_.d_model;
  const double s = config_.init_std;

  ctx_in_ = nn::make_linear(params_, "ctx.in", d, m, rng, s);
  ctx_positions_ = params_.add("ctx.positions", {config_.max_positions, m}, false);
  nn::init_normal(ctx_positions_, rng, s);
  for (std::size_t l = 0; l < config_.n_ctx_layers; ++l) {
    const std::string p = "ctx.block" + std::to_string(l);
    ContextBlock b;
    b.attn_norm = nn::make_layer_norm(params_, p + ".attn_norm", m);
    b.attn = nn::make_attention(params_, p + ".attn", m, config_.n_heads, rng, s);
    b.mlp_norm = nn::make_layer_norm(params_, p + ".mlp_norm", m);
    b.mlp_in = nn::make_linear(params_, p + ".mlp_in", m, 4 * m, rng, s);
    b.mlp_out = nn::make_linear(params_, p + ".mlp_out", 4 * m, m, rng, s);
    ctx_blocks_.push_back(b);
  }

  den_in_ = nn::make_linear(params_, "den.in", d, m, rng, s);
  den_positions_ = params_.add("den.positions", {config_.max_positions + 1, m}, false);
  nn::init_normal(den_positions_, rng, s);
  null_token_ = params_.add("den.null_token", {1, m}, false);
  nn::init_normal(null_token_, rng, s);
  time_in_ = nn::make_linear(params_, "den.time_in", m, m, rng, s);
  time_out_ = nn::make_linear(params_, "den.time_out", m, m, rng, s);
  for (std::size_t l = 0; l < config_.n_den_layers; ++l) {
    const std::string p = "den.block" + std::to_string(l);
    DenoiserBlock b;
    b.modulation = nn::make_linear(params_, p + ".modulation", m, 6 * m, rng, s);
    b.memory_norm = nn::make_layer_norm(params_, p + ".memory_norm", m);
    b.cross = nn::make_attention(params_, p + ".cross", m, config_.n_heads, rng, s);
    b.mlp_in = nn::make_linear(params_, p + ".mlp_in", m, 4 * m, rng, s);
    b.mlp_out = nn::make_linear(params_, p + ".mlp_out", 4 * m, m, rng, s);
    den_blocks_.push_back(b);
  }
  final_modulation_ = nn::make_linear(params_, "den.final_modulation", m, 2 * m, rng, s);
  den_out_ = nn::make_linear(params_, "den.out", m, d, rng, s);
}

template <typename T>
Tensor<T> TwoTowerModel<T>::mlp(const nn::Linear<T>& in, const nn::Linear<T>& out, const Tensor<T>& x) const {
  return out(nn::gelu(in(x)));
}

template <typename T>
Tensor<T> TwoTowerModel<T>::encode_context(const Tensor<T>& embeddings) const {
  if (!embeddings.defined() || embeddings.rank() != 2) {
    fail(ErrorCode::kShapeError, "context embeddings must be a [length, d] matrix");
  }
  const std::size_t len = embeddings.rows();
  if (embeddings.cols() != config_.d_embedding) {
    fail(ErrorCode::kDimensionMismatch, "context embeddings have dimension " + std::to_string(embeddings.cols()) +
                                            ", model expects " + std::to_string(config_.d_embedding));
  }
  if (len > config_.max_positions) {
    fail(ErrorCode::kContextOverflow, "context of " + std::to_string(len) + " sentences exceeds max_positions " +
                                          std::to_string(config_.max_positions));
  }
  std::vector<std::size_t> positions(len);
  for (std::size_t i = 0; i < len; ++i) positions[i] = i;
  Tensor<T> h = nn::add(ctx_in_(embeddings), nn::gather_rows(ctx_positions_, positions));
  for (const auto& b : ctx_blocks_) {
    h = nn::add(h, nn::causal_self_attention(b.attn, b.attn_norm(h)));
    h = nn::add(h, mlp(b.mlp_in, b.mlp_out, b.mlp_norm(h)));
  }
  return h;
}

template <typename T>
Tensor<T> TwoTowerModel<T>::timestep_features(const std::vector<DenoiseRow>& rows) const {
  const std::size_t m = config_.d_model;
  const std::size_t half = m / 2;
  std::vector<T> feats(rows.size() * m, T(0));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double t = static_cast<double>(rows[r].timestep);
    for (std::size_t i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
      feats[r * m + i] = static_cast<T>(std::cos(t * freq));
      feats[r * m + half + i] = static_cast<T>(std::sin(t * freq));
    }
  }
  return Tensor<T>::from({rows.size(), m}, std::move(feats));
}

template <typename T>
Tensor<T> TwoTowerModel<T>::denoise(const Tensor<T>& x_t, const std::vector<DenoiseRow>& rows,
                                    const Tensor<T>& context) const {
  const std::size_t m = config_.d_model;
  if (!x_t.defined() || x_t.rank() != 2 || x_t.rows() != rows.size() || rows.empty()) {
    fail(ErrorCode::kShapeError, "denoiser input must be [rows, d] with one descriptor per row");
  }
  if (x_t.cols() != config_.d_embedding) {
    fail(ErrorCode::kDimensionMismatch, "noised embedding has dimension " + std::to_string(x_t.cols()) +
                                            ", model expects " + std::to_string(config_.d_embedding));
  }
  const std::size_t ctx_len = context.defined() ? context.rows() : 0;
  if (context.defined() && context.cols() != m) fail(ErrorCode::kShapeError, "context width mismatch");
  std::vector<std::size_t> positions(rows.size());
  std::vector<std::size_t> limits(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.timestep >= config_.t_train) {
      fail(ErrorCode::kBadTimestep, "timestep " + std::to_string(row.timestep) + " outside [0, " +
                                        std::to_string(config_.t_train) + ")");
    }
    if (row.position > config_.max_positions) {
      fail(ErrorCode::kContextOverflow, "target position " + std::to_string(row.position) + " exceeds max_positions");
    }
    if (row.conditional && row.position > ctx_len) {
      fail(ErrorCode::kShapeError, "target position " + std::to_string(row.position) + " needs more context than the " +
                                       std::to_string(ctx_len) + " encoded rows");
    }
    positions[r] = row.position;
    limits[r] = row.conditional ? row.position + 1 : 1;
  }

  const Tensor<T> memory = context.defined() ? nn::concat_rows<T>({null_token_, context}) : null_token_;
  const Tensor<T> cond = nn::gelu(time_out_(nn::gelu(time_in_(timestep_features(rows)))));
  Tensor<T> h = nn::add(den_in_(x_t), nn::gather_rows(den_positions_, positions));
  const nn::LayerNorm<T> plain_norm;  // no affine; modulation supplies it
  for (const auto& b : den_blocks_) {
    const Tensor<T> mod = b.modulation(cond);
    auto part = [&](std::size_t k) { return nn::slice_cols(mod, k * m, m); };
    const Tensor<T> mem = b.memory_norm(memory);
    const Tensor<T> attn_in = nn::modulate(plain_norm(h), part(0), part(1));
    h = nn::add(h, nn::mul(part(2), nn::cross_attention(b.cross, attn_in, mem, limits)));
    const Tensor<T> mlp_in = nn::modulate(plain_norm(h), part(3), part(4));
    h = nn::add(h, nn::mul(part(5), mlp(b.mlp_in, b.mlp_out, mlp_in)));
  }
  const Tensor<T> fmod = final_modulation_(cond);
  return den_out_(nn::modulate(plain_norm(h), nn::slice_cols(fmod, 0, m), nn::slice_cols(fmod, m, m)));
}

template class TwoTowerModel<float>;
template class TwoTowerModel<double>;

std::vector<bool> drop_context_for_cfg(std::size_t instances, double p, const std::function<double()>& uniform) {
  if (!(p >= 0.0 && p < 1.0)) fail(ErrorCode::kInvalidConfig, "cfg drop probability must lie in [0, 1)");
  std::vector<bool> dropped(instances, false);
  for (std::size_t i = 0; i < instances; ++i) dropped[i] = uniform() < p;
  return dropped;
}

}  // namespace clm
