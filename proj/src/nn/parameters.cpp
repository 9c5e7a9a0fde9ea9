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

#include "clm/nn/parameters.hpp"

#include <algorithm>

#include "clm/common/binary_io.hpp"
#include "clm/common/error.hpp"

namespace clm::nn {
namespace {

constexpr std::string_view kMagic = "CLMW";
constexpr std::uint32_t kVersion = 1;

}  // namespace

template <typename T>
Tensor<T> ParameterStore<T>::add(const std::string& name, Shape shape, bool decay) {
  if (contains(name)) fail(ErrorCode::kInvalidConfig, "duplicate parameter name " + name);
  entries_.push_back({name, Tensor<T>::zeros(std::move(shape), true), decay});
  return entries_.back().tensor;
}

template <typename T>
bool ParameterStore<T>::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& p) { return p.name == name; });
}

template <typename T>
Tensor<T>& ParameterStore<T>::get(const std::string& name) {
  for (auto& p : entries_) {
    if (p.name == name) return p.tensor;
  }
  fail(ErrorCode::kFormatError, "unknown parameter " + name);
}

template <typename T>
const Tensor<T>& ParameterStore<T>::get(const std::string& name) const {
  return const_cast<ParameterStore*>(this)->get(name);
}

template <typename T>
std::size_t ParameterStore<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : entries_) n += p.tensor.numel();
  return n;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : entries_) p.tensor.zero_grad();
}

template <typename T>
void init_normal(Tensor<T>& t, Rng& rng, double stddev) {
  for (T& v : t.data()) v = static_cast<T>(rng.normal() * stddev);
}

template <typename T>
void save_parameters(const std::filesystem::path& path, const ParameterStore<T>& store) {
  binio::write_atomically(path, [&](std::ostream& out) {
    binio::write_magic(out, kMagic);
    binio::write_u32(out, kVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(store.entries().size()));
    for (const auto& p : store.entries()) {
      binio::write_string(out, p.name);
      const Shape& shape = p.tensor.shape();
      binio::write_u32(out, static_cast<std::uint32_t>(shape.size()));
      for (std::size_t d : shape) binio::write_u64(out, d);
      const auto values = p.tensor.data();
      std::vector<float> f(values.begin(), values.end());
      binio::write_f32s(out, f);
    }
  });
}

template <typename T>
void load_parameters(const std::filesystem::path& path, ParameterStore<T>& store) {
  auto in = binio::open_input(path, "checkpoint");
  binio::expect_magic(in, kMagic, "checkpoint");
  const std::uint32_t version = binio::read_u32(in);
  if (version != kVersion) fail(ErrorCode::kFormatError, "unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t count = binio::read_u32(in);
  if (count != store.entries().size()) {
    fail(ErrorCode::kFormatError, "checkpoint holds " + std::to_string(count) + " tensors, model expects " +
                                      std::to_string(store.entries().size()));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = binio::read_string(in);
    if (!store.contains(name)) fail(ErrorCode::kFormatError, "checkpoint tensor " + name + " not in model");
    Tensor<T>& t = store.get(name);
    const std::uint32_t rank = binio::read_u32(in);
    Shape shape(rank);
    for (auto& d : shape) d = binio::read_u64(in);
    if (shape != t.shape()) {
      fail(ErrorCode::kFormatError, "checkpoint tensor " + name + " has shape " + shape_string(shape) +
                                        ", model expects " + shape_string(t.shape()));
    }
    const auto values = binio::read_f32s(in, t.numel());
    std::copy(values.begin(), values.end(), t.data().begin());
  }
  if (!binio::at_eof(in)) fail(ErrorCode::kFormatError, "trailing bytes in checkpoint " + path.string());
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template void init_normal(Tensor<float>&, Rng&, double);
template void init_normal(Tensor<double>&, Rng&, double);
template void save_parameters(const std::filesystem::path&, const ParameterStore<float>&);
template void save_parameters(const std::filesystem::path&, const ParameterStore<double>&);
template void load_parameters(const std::filesystem::path&, ParameterStore<float>&);
template void load_parameters(const std::filesystem::path&, ParameterStore<double>&);

}  // namespace clm::nn
