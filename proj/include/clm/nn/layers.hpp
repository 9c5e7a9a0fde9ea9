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
#include <string>
#include <vector>

#include "clm/common/rng.hpp"
#include "clm/nn/ops.hpp"
#include "clm/nn/parameters.hpp"

namespace clm::nn {

// Handles to parameters owned by a ParameterStore. Layer structs are cheap
// to copy; they alias the store's tensors.

template <typename T>
struct Linear {
  Tensor<T> weight;  // [in, out]
  Tensor<T> bias;    // [out], may be undefined

  Tensor<T> operator()(const Tensor<T>& x) const { return linear(x, weight, bias); }
};

template <typename T>
struct LayerNorm {
  Tensor<T> gamma;  // undefined when the norm has no affine part
  Tensor<T> beta;

  Tensor<T> operator()(const Tensor<T>& x) const { return layer_norm(x, gamma, beta); }
};

template <typename T>
struct MultiHeadAttention {
  Linear<T> query, key, value, output;
  std::size_t heads = 1;
};

// Weights ~ N(0, init_std^2), biases zero.
template <typename T>
Linear<T> make_linear(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t out,
                      Rng& rng, double init_std, bool with_bias = true);

// gamma = 1, beta = 0; affine = false gives a parameter-free norm.
template <typename T>
LayerNorm<T> make_layer_norm(ParameterStore<T>& store, const std::string& name, std::size_t width,
                             bool affine = true);

template <typename T>
MultiHeadAttention<T> make_attention(ParameterStore<T>& store, const std::string& name, std::size_t width,
                                     std::size_t heads, Rng& rng, double init_std);

// Position i attends to positions 0..i of x.
template <typename T>
Tensor<T> causal_self_attention(const MultiHeadAttention<T>& attn, const Tensor<T>& x);

// Query row i of x attends to rows [0, key_limits[i]) of memory.
template <typename T>
Tensor<T> cross_attention(const MultiHeadAttention<T>& attn, const Tensor<T>& x, const Tensor<T>& memory,
                          const std::vector<std::size_t>& key_limits);

}  // namespace clm::nn
