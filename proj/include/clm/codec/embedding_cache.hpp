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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "clm/codec/codec.hpp"
#include "clm/codec/embedding.hpp"

namespace clm {

// Precomputed (text, lang) -> embedding table. File layout ("CLM1"):
//   magic "CLM1", u32 dimension, then records of
//   (u32 text length, text, u32 lang length, lang, dimension x f32),
// all little-endian. Records are written sorted by (lang, text).
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::size_t dimension) : dimension_(dimension) {}

  static EmbeddingCache load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void insert(std::string_view text, std::string_view lang, Embedding embedding);
  const Embedding* find(std::string_view text, std::string_view lang) const;

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::size_t dimension_;
  std::map<std::pair<std::string, std::string>, Embedding> entries_;  // (lang, text)
};

// Serves cached embeddings and defers to the wrapped codec on a miss.
class CachedCodec final : public ConceptCodec {
 public:
  CachedCodec(const ConceptCodec& inner, const EmbeddingCache& cache);

  std::size_t dimension() const override { return inner_.dimension(); }
  Embedding encode(std::string_view text, std::string_view lang) const override;
  std::string describe() const override { return inner_.describe(); }

 private:
  const ConceptCodec& inner_;
  const EmbeddingCache& cache_;
};

}  // namespace clm
