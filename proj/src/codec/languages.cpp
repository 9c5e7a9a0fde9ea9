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

#include "clm/codec/languages.hpp"

namespace clm {

bool is_well_formed_language_tag(std::string_view tag) {
  if (tag.size() != 8 || tag[3] != '_') return false;
  for (int i = 0; i < 3; ++i) {
    if (tag[i] < 'a' || tag[i] > 'z') return false;
  }
  if (tag[4] < 'A' || tag[4] > 'Z') return false;
  for (int i = 5; i < 8; ++i) {
    if (tag[i] < 'a' || tag[i] > 'z') return false;
  }
  return true;
}

const std::set<std::string, std::less<>>& default_languages() {
  static const std::set<std::string, std::less<>> kLanguages = {
      "arb_Arab", "ben_Beng", "bul_Cyrl", "cat_Latn", "ces_Latn", "dan_Latn",
      "deu_Latn", "ell_Grek", "eng_Latn", "est_Latn", "eus_Latn", "fin_Latn",
      "fra_Latn", "glg_Latn", "heb_Hebr", "hin_Deva", "hrv_Latn", "hun_Latn",
      "ind_Latn", "ita_Latn", "jpn_Jpan", "kat_Geor", "kor_Hang", "lit_Latn",
      "lvs_Latn", "mar_Deva", "mkd_Cyrl", "nld_Latn", "nob_Latn", "pes_Arab",
      "pol_Latn", "por_Latn", "ron_Latn", "rus_Cyrl", "slk_Latn", "slv_Latn",
      "spa_Latn", "srp_Cyrl", "swe_Latn", "swh_Latn", "tha_Thai", "tur_Latn",
      "ukr_Cyrl", "urd_Arab", "vie_Latn", "zho_Hans", "zho_Hant",
  };
  return kLanguages;
}

}  // namespace clm
