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
#include <filesystem>
#include <vector>

#include "clm/codec/embedding.hpp"
#include "clm/common/rng.hpp"

namespace clm {

inline constexpr double kNormalizerScaleFloor = 1e-6;

// What to use as the spread of a dimension whose interquartile range is
// exactly zero (more than half the samples tie) but which still varies.
// Sparse encoders produce such dimensions; the floor alone would blow the
// few nonzero values up by a factor of 1e6.
enum class ZeroIqrFallback { kStd, kNone };

// Per-dimension robust scaler: apply(e) = (e - center) / scale.
class Normalizer {
 public:
  Normalizer() = default;
  Normalizer(std::vector<double> center, std::vector<double> scale);

  // center 0, scale 1.
  static Normalizer identity(std::size_t dimension);

  // Median and IQR / 1.349 (floored) of the given samples. Throws
  // InsufficientData for fewer than two samples.
  static Normalizer fit(const std::vector<Embedding>& samples, ZeroIqrFallback fallback = ZeroIqrFallback::kStd);

  std::size_t dimension() const { return center_.size(); }
  const std::vector<double>& center() const { return center_; }
  const std::vector<double>& scale() const { return scale_; }

  Embedding apply(const Embedding& e) const;
  Embedding invert(const Embedding& e) const;

  // "CLMN", u32 d, center then scale as little-endian f32. Values are
  // rounded to f32 on save.
  void save(const std::filesystem::path& path) const;
  static Normalizer load(const std::filesystem::path& path);

 private:
  std::vector<double> center_;
  std::vector<double> scale_;
};

// Linear-interpolated percentile of already sorted values, q in [0, 1].
double sorted_percentile(const std::vector<double>& sorted, double q);

// Uniform sample of at most `capacity` items from a stream (Algorithm R).
class ReservoirSampler {
 public:
  ReservoirSampler(std::size_t capacity, std::uint64_t seed);

  void offer(const Embedding& e);
  const std::vector<Embedding>& sample() const { return sample_; }
  std::uint64_t seen() const { return seen_; }

 private:
  std::size_t capacity_;
  Rng rng_;
  std::uint64_t seen_ = 0;
  std::vector<Embedding> sample_;
};

// Streams `embeddings` through a reservoir of `sample_cap` and fits on it.
Normalizer fit_normalizer(const std::vector<Embedding>& embeddings, std::size_t sample_cap, std::uint64_t seed,
                          ZeroIqrFallback fallback = ZeroIqrFallback::kStd);

}  // namespace clm
