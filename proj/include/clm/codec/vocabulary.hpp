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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "clm/codec/codec.hpp"
#include "clm/codec/embedding.hpp"

namespace clm {

struct VocabularyEntry {
  std::string text;
  std::string lang;
  Embedding embedding;
};

// Decode targets for nearest-neighbour decoding. Entries keep insertion
// order, which is also the tie-breaking order.
class CodecVocabulary {
 public:
  explicit CodecVocabulary(std::size_t dimension) : dimension_(dimension) {}

  // Returns false (and leaves the vocabulary unchanged) for a duplicate
  // (text, lang) pair.
  bool add(std::string text, std::string lang, Embedding embedding);

  static CodecVocabulary build(
      const ConceptCodec& codec,
      const std::vector<std::pair<std::string, std::string>>& text_lang_pairs);

  // TSV: one record per line, "lang<TAB>text". Embeddings are recomputed
  // with the given codec.
  static CodecVocabulary load_tsv(const std::filesystem::path& path, const ConceptCodec& codec);
  void save_tsv(const std::filesystem::path& path) const;

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<VocabularyEntry>& entries() const { return entries_; }
  const VocabularyEntry& entry(std::size_t i) const { return entries_[i]; }

  // Entry indices for a language in insertion order; empty when absent.
  const std::vector<std::size_t>& indices_for(std::string_view lang) const;

 private:
  std::size_t dimension_;
  std::vector<VocabularyEntry> entries_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_lang_;
  std::map<std::pair<std::string, std::string>, std::size_t> by_key_;
};

// Index of the vocabulary entry for `lang` with maximal cosine similarity to
// e; ties go to the lowest index. Throws UnknownLanguage when the vocabulary
// has no entry for lang and DegenerateEmbedding for a zero input.
std::size_t nearest_entry(const Embedding& e, std::string_view lang, const CodecVocabulary& vocab);

std::string decode(const Embedding& e, std::string_view lang, const CodecVocabulary& vocab);

}  // namespace clm
