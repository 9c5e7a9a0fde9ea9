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

#include "clm/data/normalizer.hpp"

#include <algorithm>
#include <cmath>

#include "clm/common/binary_io.hpp"
#include "clm/common/error.hpp"

namespace clm {
namespace {

// Parameters are kept at f32 precision so that a saved and reloaded
// normalizer behaves bitwise like the fitted one.
double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

Normalizer::Normalizer(std::vector<double> center, std::vector<double> scale)
    : center_(std::move(center)), scale_(std::move(scale)) {
  if (center_.size() != scale_.size() || center_.empty()) {
    fail(ErrorCode::kDimensionMismatch, "normalizer center and scale must have the same nonzero size");
  }
  for (std::size_t i = 0; i < scale_.size(); ++i) {
    if (!(scale_[i] > 0.0) || !std::isfinite(scale_[i]) || !std::isfinite(center_[i])) {
      fail(ErrorCode::kNumericalError, "normalizer scale must be positive and finite in dimension " + std::to_string(i));
    }
  }
}

Normalizer Normalizer::identity(std::size_t dimension) {
  return Normalizer(std::vector<double>(dimension, 0.0), std::vector<double>(dimension, 1.0));
}

double sorted_percentile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) fail(ErrorCode::kInsufficientData, "percentile of an empty set");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

Normalizer Normalizer::fit(const std::vector<Embedding>& samples, ZeroIqrFallback fallback) {
  if (samples.size() < 2) {
    fail(ErrorCode::kInsufficientData, "normalizer needs at least 2 embeddings, got " + std::to_string(samples.size()));
  }
  const std::size_t d = samples.front().dimension();
  std::vector<double> center(d), scale(d), column(samples.size());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].dimension() != d) fail(ErrorCode::kDimensionMismatch, "normalizer samples differ in dimension");
      column[i] = samples[i][j];
    }
    std::sort(column.begin(), column.end());
    center[j] = to_f32(sorted_percentile(column, 0.5));
    const double iqr = sorted_percentile(column, 0.75) - sorted_percentile(column, 0.25);
    double spread = iqr / 1.349;
    if (spread == 0.0 && fallback == ZeroIqrFallback::kStd) {
      double mean = 0.0, var = 0.0;
      for (double v : column) mean += v;
      mean /= static_cast<double>(column.size());
      for (double v : column) var += (v - mean) * (v - mean);
      spread = std::sqrt(var / static_cast<double>(column.size()));
    }
    scale[j] = to_f32(std::max(spread, kNormalizerScaleFloor));
  }
  return Normalizer(std::move(center), std::move(scale));
}

Embedding Normalizer::apply(const Embedding& e) const {
  if (e.dimension() != dimension()) fail(ErrorCode::kDimensionMismatch, "normalizer dimension mismatch");
  Embedding out(e.dimension());
  for (std::size_t i = 0; i < e.dimension(); ++i) out[i] = static_cast<float>((e[i] - center_[i]) / scale_[i]);
  return out;
}

Embedding Normalizer::invert(const Embedding& e) const {
  if (e.dimension() != dimension()) fail(ErrorCode::kDimensionMismatch, "normalizer dimension mismatch");
  Embedding out(e.dimension());
  for (std::size_t i = 0; i < e.dimension(); ++i) out[i] = static_cast<float>(e[i] * scale_[i] + center_[i]);
  return out;
}

void Normalizer::save(const std::filesystem::path& path) const {
  binio::write_atomically(path, [&](std::ostream& out) {
    binio::write_magic(out, "CLMN");
    binio::write_u32(out, static_cast<std::uint32_t>(dimension()));
    for (double v : center_) binio::write_f32(out, static_cast<float>(v));
    for (double v : scale_) binio::write_f32(out, static_cast<float>(v));
  });
}

Normalizer Normalizer::load(const std::filesystem::path& path) {
  auto in = binio::open_input(path, "normalizer");
  binio::expect_magic(in, "CLMN", path.string());
  const std::uint32_t d = binio::read_u32(in);
  if (d == 0) fail(ErrorCode::kFormatError, path.string() + ": zero dimension");
  const auto c = binio::read_f32s(in, d);
  const auto s = binio::read_f32s(in, d);
  if (!binio::at_eof(in)) fail(ErrorCode::kFormatError, path.string() + ": trailing bytes");
  return Normalizer(std::vector<double>(c.begin(), c.end()), std::vector<double>(s.begin(), s.end()));
}

ReservoirSampler::ReservoirSampler(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
  if (capacity == 0) fail(ErrorCode::kInvalidConfig, "reservoir capacity must be >= 1");
}

void ReservoirSampler::offer(const Embedding& e) {
  if (sample_.size() < capacity_) {
    sample_.push_back(e);
  } else {
    const std::uint64_t j = rng_.uniform_int(seen_ + 1);
    if (j < capacity_) sample_[j] = e;
  }
  ++seen_;
}

Normalizer fit_normalizer(const std::vector<Embedding>& embeddings, std::size_t sample_cap, std::uint64_t seed,
                          ZeroIqrFallback fallback) {
  ReservoirSampler reservoir(sample_cap, seed);
  for (const auto& e : embeddings) reservoir.offer(e);
  return Normalizer::fit(reservoir.sample(), fallback);
}

}  // namespace clm
