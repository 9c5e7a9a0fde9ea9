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

#include "clm/codec/sentinels.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "clm/codec/languages.hpp"
#include "clm/common/error.hpp"

namespace clm {

SentinelTable load_sentinel_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open sentinel table " + path.string());
  SentinelTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 4) {
      fail(ErrorCode::kFormatError, path.string() + ":" + std::to_string(line_no) +
                                        ": expected 4 tab-separated columns");
    }
    table[fields[0]] = SentinelTexts{fields[1], fields[2], fields[3]};
  }
  return table;
}

SentinelSet::SentinelSet(const ConceptCodec& codec, const SentinelTable& table) {
  auto make = [&](const std::string& text, const std::string& lang) {
    return Sentinel{text, lang, codec.encode(text, lang)};
  };
  const std::string english(kEnglish);
  entries_.emplace(english, Entry{make(std::string(kEnglishUserTurn), english),
                                  make(std::string(kEnglishAssistantTurn), english),
                                  make(std::string(kEnglishEndOfText), english)});
  for (const auto& [lang, texts] : table) {
    entries_.insert_or_assign(lang, Entry{make(texts.user_turn, lang),
                                          make(texts.assistant_turn, lang), make(texts.eot, lang)});
  }
}

const Sentinel& SentinelSet::get(SentinelKind kind, std::string_view lang) const {
  auto it = entries_.find(lang);
  if (it == entries_.end()) it = entries_.find(kEnglish);
  const Entry& entry = it->second;
  switch (kind) {
    case SentinelKind::kUserTurn: return entry.user_turn;
    case SentinelKind::kAssistantTurn: return entry.assistant_turn;
    case SentinelKind::kEndOfText: return entry.eot;
  }
  return entry.eot;
}

}  // namespace clm
