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
#include <set>
#include <string>
#include <string_view>

namespace clm {

enum class ChineseScript { kHans, kHant, kAmbiguous };

std::string_view chinese_script_name(ChineseScript script);

// Counts code points from a simplified-only and a traditional-only set; the
// larger count wins, ties (including 0/0) are ambiguous.
class ChineseScriptClassifier {
 public:
  ChineseScriptClassifier(std::set<char32_t> simplified_only, std::set<char32_t> traditional_only);

  // Each file holds one character per line (UTF-8).
  static ChineseScriptClassifier load(const std::filesystem::path& simplified_only,
                                      const std::filesystem::path& traditional_only);
  // Loads data/zh/{simplified,traditional}_only.txt under the given data dir.
  static ChineseScriptClassifier load_bundled(const std::filesystem::path& data_dir);

  ChineseScript classify(std::string_view text) const;

  // Maps unified Chinese tags (cmn_Hani, zho_Hani, cmn_Hans, cmn_Hant) to
  // zho_Hans / zho_Hant by script, routing ambiguous text to zho_Hans. Any
  // other tag is returned unchanged.
  std::string resolve_language(std::string_view lang, std::string_view text) const;

 private:
  std::set<char32_t> simplified_;
  std::set<char32_t> traditional_;
};

}  // namespace clm
