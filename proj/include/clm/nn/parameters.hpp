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
#include <filesystem>
#include <string>
#include <vector>

#include "clm/common/rng.hpp"
#include "clm/nn/tensor.hpp"

namespace clm::nn {

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> tensor;
  bool decay = true;  // receives weight decay
};

// Ordered, named collection of trainable tensors. Registration order is the
// serialization order.
template <typename T>
class ParameterStore {
 public:
  // Registers a zero-initialized tensor and returns a handle aliasing it.
  Tensor<T> add(const std::string& name, Shape shape, bool decay);

  Tensor<T>& get(const std::string& name);
  const Tensor<T>& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Parameter<T>>& entries() { return entries_; }
  const std::vector<Parameter<T>>& entries() const { return entries_; }

  std::size_t parameter_count() const;
  void zero_grad();

  // Copies values by name from a store with identical names and shapes.
  template <typename U>
  void copy_values_from(const ParameterStore<U>& other);

 private:
  std::vector<Parameter<T>> entries_;
};

template <typename T>
void init_normal(Tensor<T>& t, Rng& rng, double stddev);

// Binary checkpoint: "CLMW", u32 version, u32 count, then per tensor its
// name, u32 rank, u64 dims and f32 values.
template <typename T>
void save_parameters(const std::filesystem::path& path, const ParameterStore<T>& store);
// Loads into an existing store; names and shapes must match exactly.
template <typename T>
void load_parameters(const std::filesystem::path& path, ParameterStore<T>& store);

template <typename T>
template <typename U>
void ParameterStore<T>::copy_values_from(const ParameterStore<U>& other) {
  for (auto& p : entries_) {
    const Tensor<U>& src = other.get(p.name);
    auto dst = p.tensor.data();
    const auto sv = src.data();
    for (std::size_t i = 0; i < dst.size() && i < sv.size(); ++i) dst[i] = static_cast<T>(sv[i]);
  }
}

}  // namespace clm::nn
