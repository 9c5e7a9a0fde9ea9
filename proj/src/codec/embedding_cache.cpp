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

#include "clm/codec/embedding_cache.hpp"

#include <fstream>

#include "clm/common/binary_io.hpp"
#include "clm/common/error.hpp"

namespace clm {

EmbeddingCache EmbeddingCache::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open embedding cache " + path.string());
  binio::expect_magic(in, "CLM1", path.string());
  EmbeddingCache cache(binio::read_u32(in));
  while (!binio::at_eof(in)) {
    std::string text = binio::read_string(in);
    std::string lang = binio::read_string(in);
    cache.insert(text, lang, Embedding(binio::read_f32s(in, cache.dimension_)));
  }
  return cache;
}

void EmbeddingCache::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write embedding cache " + path.string());
  binio::write_magic(out, "CLM1");
  binio::write_u32(out, static_cast<std::uint32_t>(dimension_));
  for (const auto& [key, embedding] : entries_) {
    binio::write_string(out, key.second);
    binio::write_string(out, key.first);
    binio::write_f32s(out, embedding.values());
  }
}

void EmbeddingCache::insert(std::string_view text, std::string_view lang, Embedding embedding) {
  if (embedding.dimension() != dimension_) {
    fail(ErrorCode::kDimensionMismatch, "cache embedding has dimension " +
                                            std::to_string(embedding.dimension()) +
                                            ", expected " + std::to_string(dimension_));
  }
  entries_.insert_or_assign({std::string(lang), std::string(text)}, std::move(embedding));
}

const Embedding* EmbeddingCache::find(std::string_view text, std::string_view lang) const {
  auto it = entries_.find({std::string(lang), std::string(text)});
  return it == entries_.end() ? nullptr : &it->second;
}

CachedCodec::CachedCodec(const ConceptCodec& inner, const EmbeddingCache& cache)
    : inner_(inner), cache_(cache) {
  if (cache.dimension() != inner.dimension()) {
    fail(ErrorCode::kDimensionMismatch, "embedding cache dimension does not match the codec");
  }
}

Embedding CachedCodec::encode(std::string_view text, std::string_view lang) const {
  if (const Embedding* hit = cache_.find(text, lang)) return *hit;
  return inner_.encode(text, lang);
}

}  // namespace clm
