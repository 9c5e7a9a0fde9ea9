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

#include "clm/segment/chinese_script.hpp"

#include <fstream>

#include "clm/common/error.hpp"
#include "clm/common/utf8.hpp"

namespace clm {
namespace {

std::set<char32_t> load_char_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open character set " + path.string());
  std::set<char32_t> chars;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::u32string cps = utf8::decode(utf8::trim(line));
    if (cps.empty()) continue;
    if (cps.size() != 1) {
      fail(ErrorCode::kFormatError,
           path.string() + ":" + std::to_string(line_no) + ": expected one character per line");
    }
    chars.insert(cps.front());
  }
  return chars;
}

}  // namespace

std::string_view chinese_script_name(ChineseScript script) {
  switch (script) {
    case ChineseScript::kHans: return "Hans";
    case ChineseScript::kHant: return "Hant";
    case ChineseScript::kAmbiguous: return "Ambiguous";
  }
  return "Ambiguous";
}

ChineseScriptClassifier::ChineseScriptClassifier(std::set<char32_t> simplified_only,
                                                 std::set<char32_t> traditional_only)
    : simplified_(std::move(simplified_only)), traditional_(std::move(traditional_only)) {}

ChineseScriptClassifier ChineseScriptClassifier::load(
    const std::filesystem::path& simplified_only, const std::filesystem::path& traditional_only) {
  return ChineseScriptClassifier(load_char_set(simplified_only), load_char_set(traditional_only));
}

ChineseScriptClassifier ChineseScriptClassifier::load_bundled(const std::filesystem::path& data_dir) {
  return load(data_dir / "zh" / "simplified_only.txt", data_dir / "zh" / "traditional_only.txt");
}

ChineseScript ChineseScriptClassifier::classify(std::string_view text) const {
  std::size_t simplified = 0;
  std::size_t traditional = 0;
  for (char32_t c : utf8::decode(text)) {
    if (simplified_.contains(c)) ++simplified;
    if (traditional_.contains(c)) ++traditional;
  }
  if (simplified > traditional) return ChineseScript::kHans;
  if (traditional > simplified) return ChineseScript::kHant;
  return ChineseScript::kAmbiguous;
}

std::string ChineseScriptClassifier::resolve_language(std::string_view lang,
                                                      std::string_view text) const {
  if (lang == "cmn_Hani" || lang == "zho_Hani" || lang == "cmn_Hans" || lang == "cmn_Hant") {
    return classify(text) == ChineseScript::kHant ? "zho_Hant" : "zho_Hans";
  }
  return std::string(lang);
}

}  // namespace clm
