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

#include "clm/eval/metrics.hpp"

#include <cmath>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/uscript.h>

#include "clm/common/error.hpp"

namespace clm {

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kL2:
      return "L2";
    case Metric::kRoundTripL2:
      return "RT_L2";
    case Metric::kRougeL:
      return "ROUGE_L";
    case Metric::kCosineAlign:
      return "COSINE_ALIGN";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  for (Metric m : {Metric::kL2, Metric::kRoundTripL2, Metric::kRougeL, Metric::kCosineAlign}) {
    if (metric_name(m) == name) return m;
  }
  fail(ErrorCode::kFormatError, "unknown metric '" + std::string(name) + "'");
}

double l2(const Embedding& pred, const Embedding& gt) {
  require_same_dimension(pred, gt);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.dimension(); ++i) {
    const double diff = static_cast<double>(pred[i]) - gt[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

double roundtrip_l2(const Embedding& pred, const Embedding& gt, std::string_view lang, const ConceptCodec& codec,
                    const CodecVocabulary& vocab) {
  return l2(codec.encode(decode(pred, lang, vocab), lang), gt);
}

namespace {

bool splits_per_character(UChar32 c) {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(c, &status);
  if (U_FAILURE(status)) return false;
  return script == USCRIPT_HAN || script == USCRIPT_HIRAGANA || script == USCRIPT_KATAKANA ||
         script == USCRIPT_HANGUL;
}

std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

}  // namespace

std::vector<std::string> rouge_tokens(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) fail(ErrorCode::kIoError, "ICU NFC normalizer unavailable");
  icu::UnicodeString s = nfc->normalize(
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size()))), status);
  if (U_FAILURE(status)) fail(ErrorCode::kFormatError, "text is not valid for NFC normalization");
  s.toLower(icu::Locale::getRoot());

  std::vector<std::string> tokens;
  icu::UnicodeString current;
  auto flush = [&] {
    if (!current.isEmpty()) tokens.push_back(to_utf8(current));
    current.remove();
  };
  for (int32_t i = 0; i < s.length(); i = s.moveIndex32(i, 1)) {
    const UChar32 c = s.char32At(i);
    if (u_isUWhiteSpace(c)) {
      flush();
    } else if (splits_per_character(c)) {
      flush();
      current.append(c);
      flush();
    } else {
      current.append(c);
    }
  }
  flush();
  return tokens;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  const auto cand = rouge_tokens(candidate);
  const auto ref = rouge_tokens(reference);
  if (cand.empty() || ref.empty()) return 0.0;
  const std::size_t l = lcs_length(cand, ref);
  if (l == 0) return 0.0;
  const double p = static_cast<double>(l) / static_cast<double>(cand.size());
  const double r = static_cast<double>(l) / static_cast<double>(ref.size());
  return 2.0 * p * r / (p + r);
}

}  // namespace clm
