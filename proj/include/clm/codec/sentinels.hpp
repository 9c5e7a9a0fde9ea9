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

#include "clm/codec/codec.hpp"
#include "clm/codec/embedding.hpp"

namespace clm {

inline constexpr std::string_view kEnglishUserTurn = "User turn.";
inline constexpr std::string_view kEnglishAssistantTurn = "Assistant turn.";
inline constexpr std::string_view kEnglishEndOfText = "End of text.";

struct SentinelTexts {
  std::string user_turn;
  std::string assistant_turn;
  std::string eot;
};

// A resolved sentinel sentence. `lang` is the tag the text was encoded
// with; for languages without a translation it is English.
struct Sentinel {
  std::string text;
  std::string lang;
  Embedding embedding;
};

enum class SentinelKind { kUserTurn, kAssistantTurn, kEndOfText };

using SentinelTable = std::map<std::string, SentinelTexts, std::less<>>;

// TSV with columns lang, user_turn, assistant_turn, eot. Lines starting with
// '#' are comments.
SentinelTable load_sentinel_table(const std::filesystem::path& path);

// Per-language sentinel sentences and their embeddings under one codec.
// English is always present with the canonical texts unless the table
// overrides it; lookups for untranslated languages fall back to English.
class SentinelSet {
 public:
  SentinelSet(const ConceptCodec& codec, const SentinelTable& table = {});

  const Sentinel& get(SentinelKind kind, std::string_view lang) const;
  const Sentinel& user_turn(std::string_view lang) const { return get(SentinelKind::kUserTurn, lang); }
  const Sentinel& assistant_turn(std::string_view lang) const {
    return get(SentinelKind::kAssistantTurn, lang);
  }
  const Sentinel& eot(std::string_view lang) const { return get(SentinelKind::kEndOfText, lang); }
  const Embedding& eot_embedding(std::string_view lang) const { return eot(lang).embedding; }

  bool has_translation(std::string_view lang) const { return entries_.contains(lang); }

 private:
  struct Entry {
    Sentinel user_turn;
    Sentinel assistant_turn;
    Sentinel eot;
  };
  std::map<std::string, Entry, std::less<>> entries_;
};

}  // namespace clm
