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

#include <string>
#include <string_view>
#include <vector>

#include "clm/codec/codec.hpp"
#include "clm/codec/embedding.hpp"
#include "clm/codec/vocabulary.hpp"

namespace clm {

enum class Metric { kL2, kRoundTripL2, kRougeL, kCosineAlign };

std::string_view metric_name(Metric metric);  // "L2", "RT_L2", "ROUGE_L", "COSINE_ALIGN"
Metric parse_metric(std::string_view name);

struct EvalRecord {
  std::string doc_id;
  std::string lang;
  std::size_t prefix_len = 0;  // >= 1 for prefix metrics, 0 otherwise
  Metric metric = Metric::kL2;
  double value = 0.0;
};

// Euclidean distance. Throws DimensionMismatch.
double l2(const Embedding& pred, const Embedding& gt);

// l2(encode(decode(pred, lang, vocab), lang), gt).
double roundtrip_l2(const Embedding& pred, const Embedding& gt, std::string_view lang, const ConceptCodec& codec,
                    const CodecVocabulary& vocab);

// NFC, lowercase, split on Unicode whitespace. Inside each piece, every
// Han, kana or Hangul code point becomes its own token, so text written
// without spaces is compared character by character.
std::vector<std::string> rouge_tokens(std::string_view text);

// Length of the longest common subsequence.
std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Sentence-level ROUGE-L F1 over rouge_tokens; 0 when either side is empty
// or nothing matches.
double rouge_l(std::string_view candidate, std::string_view reference);

}  // namespace clm
