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

#include "clm/nn/layers.hpp"

#include "clm/common/error.hpp"

namespace clm::nn {

template <typename T>
Linear<T> make_linear(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t out,
                      Rng& rng, double init_std, bool with_bias) {
  Linear<T> layer;
  layer.weight = store.add(name + ".weight", {in, out}, true);
  init_normal(layer.weight, rng, init_std);
  if (with_bias) layer.bias = store.add(name + ".bias", {out}, false);
  return layer;
}

template <typename T>
LayerNorm<T> make_layer_norm(ParameterStore<T>& store, const std::string& name, std::size_t width, bool affine) {
  LayerNorm<T> norm;
  if (!affine) return norm;
  norm.gamma = store.add(name + ".gamma", {width}, false);
  for (T& v : norm.gamma.data()) v = T(1);
  norm.beta = store.add(name + ".beta", {width}, false);
  return norm;
}

template <typename T>
MultiHeadAttention<T> make_attention(ParameterStore<T>& store, const std::string& name, std::size_t width,
                                     std::size_t heads, Rng& rng, double init_std) {
  if (heads == 0 || width % heads != 0) {
    fail(ErrorCode::kInvalidConfig, "attention width " + std::to_string(width) + " not divisible by " +
                                        std::to_string(heads) + " heads");
  }
  MultiHeadAttention<T> attn;
  attn.query = make_linear(store, name + ".query", width, width, rng, init_std);
  attn.key = make_linear(store, name + ".key", width, width, rng, init_std);
  attn.value = make_linear(store, name + ".value", width, width, rng, init_std);
  attn.output = make_linear(store, name + ".output", width, width, rng, init_std);
  attn.heads = heads;
  return attn;
}

template <typename T>
Tensor<T> causal_self_attention(const MultiHeadAttention<T>& attn, const Tensor<T>& x) {
  std::vector<std::size_t> limits(x.rows());
  for (std::size_t i = 0; i < limits.size(); ++i) limits[i] = i + 1;
  return attn.output(attention(attn.query(x), attn.key(x), attn.value(x), attn.heads, limits));
}

template <typename T>
Tensor<T> cross_attention(const MultiHeadAttention<T>& attn, const Tensor<T>& x, const Tensor<T>& memory,
                          const std::vector<std::size_t>& key_limits) {
  return attn.output(attention(attn.query(x), attn.key(memory), attn.value(memory), attn.heads, key_limits));
}

#define CLM_INSTANTIATE_LAYERS(T)                                                                          \
  template Linear<T> make_linear(ParameterStore<T>&, const std::string&, std::size_t, std::size_t, Rng&,   \
                                 double, bool);                                                            \
  template LayerNorm<T> make_layer_norm(ParameterStore<T>&, const std::string&, std::size_t, bool);        \
  template MultiHeadAttention<T> make_attention(ParameterStore<T>&, const std::string&, std::size_t,       \
                                                std::size_t, Rng&, double);                                \
  template Tensor<T> causal_self_attention(const MultiHeadAttention<T>&, const Tensor<T>&);                \
  template Tensor<T> cross_attention(const MultiHeadAttention<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                     const std::vector<std::size_t>&);

CLM_INSTANTIATE_LAYERS(float)
CLM_INSTANTIATE_LAYERS(double)

}  // namespace clm::nn
