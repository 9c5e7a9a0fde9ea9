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
#include <string>
#include <vector>

#include "clm/nn/layers.hpp"
#include "clm/nn/parameters.hpp"

namespace clm {

struct ModelConfig {
  std::size_t d_embedding = 64;
  std::size_t d_model = 128;
  std::size_t n_ctx_layers = 4;
  std::size_t n_den_layers = 4;
  std::size_t n_heads = 4;
  std::size_t max_positions = 128;
  std::size_t t_train = 100;
  double cfg_drop_prob = 0.15;
  double init_std = 0.02;

  void validate() const;
  // Parameter count implied by the dimensions, computed without building
  // the model.
  std::size_t analytic_parameter_count() const;
};

// Descriptor for one denoiser row.
struct DenoiseRow {
  std::size_t timestep = 0;
  std::size_t position = 0;  // target position; reads context rows [0, position)
  bool conditional = true;
};

// What the trainer, sampler and generator need from a concept model.
template <typename T>
class ConceptDenoiser {
 public:
  virtual ~ConceptDenoiser() = default;

  virtual const ModelConfig& config() const = 0;
  virtual nn::ParameterStore<T>& parameters() = 0;

  // embeddings: [L, d] with 1 <= L <= max_positions. Returns [L, d_model];
  // row j depends only on rows 0..j of the input.
  virtual nn::Tensor<T> encode_context(const nn::Tensor<T>& embeddings) const = 0;

  // x_t: [m, d]; context: encode_context output or undefined when every row
  // is unconditional. Returns the predicted clean embeddings [m, d].
  virtual nn::Tensor<T> denoise(const nn::Tensor<T>& x_t, const std::vector<DenoiseRow>& rows,
                                const nn::Tensor<T>& context) const = 0;
};

// Causal context encoder plus a denoiser that predicts the clean embedding
// of one target position from a noised version of it, the timestep and the
// encoded context prefix. All embeddings are in normalized space.
//
// Denoiser rows are independent: each row carries its own noised input,
// timestep and target position, and attends to the learned null token plus
// the context rows before its position. A row marked unconditional sees
// only the null token.
template <typename T>
class TwoTowerModel final : public ConceptDenoiser<T> {
 public:
  TwoTowerModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const override { return config_; }
  nn::ParameterStore<T>& parameters() override { return params_; }
  const nn::ParameterStore<T>& parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.parameter_count(); }

  nn::Tensor<T> encode_context(const nn::Tensor<T>& embeddings) const override;
  nn::Tensor<T> denoise(const nn::Tensor<T>& x_t, const std::vector<DenoiseRow>& rows,
                        const nn::Tensor<T>& context) const override;

 private:
  struct ContextBlock {
    nn::LayerNorm<T> attn_norm;
    nn::MultiHeadAttention<T> attn;
    nn::LayerNorm<T> mlp_norm;
    nn::Linear<T> mlp_in, mlp_out;
  };
  struct DenoiserBlock {
    nn::Linear<T> modulation;  // -> shift, scale, gate for attention and MLP
    nn::LayerNorm<T> memory_norm;
    nn::MultiHeadAttention<T> cross;
    nn::Linear<T> mlp_in, mlp_out;
  };

  nn::Tensor<T> timestep_features(const std::vector<DenoiseRow>& rows) const;
  nn::Tensor<T> mlp(const nn::Linear<T>& in, const nn::Linear<T>& out, const nn::Tensor<T>& x) const;

  ModelConfig config_;
  nn::ParameterStore<T> params_;

  nn::Linear<T> ctx_in_;
  nn::Tensor<T> ctx_positions_;  // [max_positions, d_model]
  std::vector<ContextBlock> ctx_blocks_;

  nn::Linear<T> den_in_;
  nn::Tensor<T> den_positions_;  // [max_positions + 1, d_model]
  nn::Tensor<T> null_token_;     // [1, d_model]
  nn::Linear<T> time_in_, time_out_;
  std::vector<DenoiserBlock> den_blocks_;
  nn::Linear<T> final_modulation_;
  nn::Linear<T> den_out_;
};

extern template class TwoTowerModel<float>;
extern template class TwoTowerModel<double>;

// Marks each of `instances` as context-dropped when uniform() < p.
// Returns the drop mask.
std::vector<bool> drop_context_for_cfg(std::size_t instances, double p,
                                       const std::function<double()>& uniform);

}  // namespace clm
