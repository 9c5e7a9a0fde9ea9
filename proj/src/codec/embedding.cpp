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

#include "clm/codec/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "clm/common/error.hpp"

namespace clm {

void require_same_dimension(const Embedding& a, const Embedding& b) {
  if (a.dimension() != b.dimension()) {
    fail(ErrorCode::kDimensionMismatch,
         "embedding dimensions differ: " + std::to_string(a.dimension()) + " vs " +
             std::to_string(b.dimension()));
  }
}

double dot(const Embedding& a, const Embedding& b) {
  require_same_dimension(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

double l2_norm(const Embedding& e) {
  double sum = 0.0;
  for (float v : e.values()) sum += static_cast<double>(v) * v;
  return std::sqrt(sum);
}

bool all_finite(const Embedding& e) {
  return std::all_of(e.values().begin(), e.values().end(),
                     [](float v) { return std::isfinite(v); });
}

double cosine(const Embedding& a, const Embedding& b) {
  require_same_dimension(a, b);
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) {
    fail(ErrorCode::kDegenerateEmbedding, "cosine of a zero vector");
  }
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

Embedding normalized(const Embedding& e) {
  const double n = l2_norm(e);
  if (n == 0.0) fail(ErrorCode::kDegenerateEmbedding, "cannot normalize a zero vector");
  std::vector<float> out(e.dimension());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(e[i]) / n);
  }
  return Embedding(std::move(out));
}

}  // namespace clm
