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
#include <initializer_list>
#include <span>
#include <vector>

namespace clm {

// A sentence-level concept: a fixed-dimension real vector. Storage is single
// precision (the on-disk formats are f32); reductions are done in double.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::size_t dimension) : values_(dimension, 0.0f) {}
  explicit Embedding(std::vector<float> values) : values_(std::move(values)) {}
  Embedding(std::initializer_list<float> values) : values_(values) {}

  std::size_t dimension() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  float operator[](std::size_t i) const { return values_[i]; }
  float& operator[](std::size_t i) { return values_[i]; }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }
  const std::vector<float>& vector() const { return values_; }

  bool operator==(const Embedding& other) const = default;

 private:
  std::vector<float> values_;
};

double dot(const Embedding& a, const Embedding& b);
double l2_norm(const Embedding& e);
bool all_finite(const Embedding& e);

// Throws DimensionMismatch on unequal sizes, DegenerateEmbedding when either
// side is the zero vector. Result is clamped to [-1, 1].
double cosine(const Embedding& a, const Embedding& b);

// Unit-norm copy; throws DegenerateEmbedding for the zero vector.
Embedding normalized(const Embedding& e);

void require_same_dimension(const Embedding& a, const Embedding& b);

}  // namespace clm
