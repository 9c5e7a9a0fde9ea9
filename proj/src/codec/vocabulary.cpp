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

#include "clm/codec/vocabulary.hpp"

#include <cmath>
#include <fstream>

#include "clm/common/error.hpp"

namespace clm {

bool CodecVocabulary::add(std::string text, std::string lang, Embedding embedding) {
  if (embedding.dimension() != dimension_) {
    fail(ErrorCode::kDimensionMismatch, "vocabulary embedding has dimension " +
                                            std::to_string(embedding.dimension()) +
                                            ", expected " + std::to_string(dimension_));
  }
  auto key = std::make_pair(lang, text);
  if (by_key_.contains(key)) return false;
  const std::size_t index = entries_.size();
  by_key_.emplace(std::move(key), index);
  by_lang_[lang].push_back(index);
  entries_.push_back({std::move(text), std::move(lang), std::move(embedding)});
  return true;
}

CodecVocabulary CodecVocabulary::build(
    const ConceptCodec& codec,
    const std::vector<std::pair<std::string, std::string>>& text_lang_pairs) {
  CodecVocabulary vocab(codec.dimension());
  for (const auto& [text, lang] : text_lang_pairs) {
    vocab.add(text, lang, codec.encode(text, lang));
  }
  return vocab;
}

CodecVocabulary CodecVocabulary::load_tsv(const std::filesystem::path& path,
                                          const ConceptCodec& codec) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open vocabulary file " + path.string());
  CodecVocabulary vocab(codec.dimension());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorCode::kFormatError,
           path.string() + ":" + std::to_string(line_no) + ": expected lang<TAB>text");
    }
    std::string lang = line.substr(0, tab);
    std::string text = line.substr(tab + 1);
    Embedding e = codec.encode(text, lang);
    vocab.add(std::move(text), std::move(lang), std::move(e));
  }
  return vocab;
}

void CodecVocabulary::save_tsv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write vocabulary file " + path.string());
  for (const auto& entry : entries_) out << entry.lang << '\t' << entry.text << '\n';
}

const std::vector<std::size_t>& CodecVocabulary::indices_for(std::string_view lang) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = by_lang_.find(lang);
  return it == by_lang_.end() ? kEmpty : it->second;
}

std::size_t nearest_entry(const Embedding& e, std::string_view lang, const CodecVocabulary& vocab) {
  if (e.dimension() != vocab.dimension()) {
    fail(ErrorCode::kDimensionMismatch, "decode input has dimension " +
                                            std::to_string(e.dimension()) + ", vocabulary has " +
                                            std::to_string(vocab.dimension()));
  }
  const auto& candidates = vocab.indices_for(lang);
  if (candidates.empty()) {
    fail(ErrorCode::kUnknownLanguage, "vocabulary has no entry for '" + std::string(lang) + "'");
  }
  if (l2_norm(e) == 0.0) fail(ErrorCode::kDegenerateEmbedding, "cannot decode a zero vector");

  std::size_t best = candidates.front();
  double best_cos = -2.0;
  for (std::size_t index : candidates) {
    const double c = cosine(e, vocab.entry(index).embedding);
    if (c > best_cos) {
      best_cos = c;
      best = index;
    }
  }
  return best;
}

std::string decode(const Embedding& e, std::string_view lang, const CodecVocabulary& vocab) {
  return vocab.entry(nearest_entry(e, lang, vocab)).text;
}

}  // namespace clm
