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

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace clm {

// "xxx_Yyyy": ISO 639-3 code, underscore, ISO 15924 script.
bool is_well_formed_language_tag(std::string_view tag);

inline constexpr std::string_view kEnglish = "eng_Latn";

// Languages the bundled codec accepts by default.
const std::set<std::string, std::less<>>& default_languages();

}  // namespace clm
