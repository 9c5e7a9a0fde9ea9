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

#include <cmath>
#include <string>
#include <vector>

#include "clm/codec/codec.hpp"
#include "clm/codec/languages.hpp"
#include "clm/common/error.hpp"
#include "clm/common/hash.hpp"
#include "clm/common/utf8.hpp"

namespace clm {

void validate_encode_input(std::string_view text, std::string_view lang,
                           const std::set<std::string, std::less<>>& languages) {
  if (utf8::trim(text).empty()) {
    fail(ErrorCode::kInvalidSentence, "sentence is empty after trimming");
  }
  if (!is_well_formed_language_tag(lang) || !languages.contains(lang)) {
    fail(ErrorCode::kUnknownLanguage, "unknown language tag '" + std::string(lang) + "'");
  }
}

ToyCodec::ToyCodec(ToyCodecConfig config) : ToyCodec(config, default_languages()) {}

ToyCodec::ToyCodec(ToyCodecConfig config, std::set<std::string, std::less<>> languages)
    : config_(config), languages_(std::move(languages)) {
  if (config_.dimension == 0) fail(ErrorCode::kInvalidConfig, "codec dimension must be positive");
}

Embedding ToyCodec::encode(std::string_view text, std::string_view lang) const {
  validate_encode_input(text, lang, languages_);

  std::string keyed(lang);
  keyed += '|';
  keyed += text;
  const std::u32string cps = utf8::decode(keyed);

  const std::size_t d = config_.dimension;
  std::vector<double> acc(d, 0.0);
  std::string gram;
  for (std::size_t n = 1; n <= 3; ++n) {
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      gram.assign(1, static_cast<char>(n));
      for (std::size_t k = 0; k < n; ++k) utf8::append(gram, cps[i + k]);
      const std::uint64_t key = fnv1a64(gram);
      const std::size_t bucket = mix64(key ^ config_.bucket_seed) % d;
      const bool negative = (mix64(key ^ config_.sign_seed) & 1ULL) != 0;
      acc[bucket] += negative ? -1.0 : 1.0;
    }
  }

  double sum = 0.0;
  for (double a : acc) sum += a * a;
  if (sum == 0.0) {
    // Every bucket cancelled; fall back to a deterministic basis vector.
    acc[mix64(fnv1a64(keyed) ^ config_.bucket_seed) % d] = 1.0;
    sum = 1.0;
  }
  const double norm = std::sqrt(sum);
  std::vector<float> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = static_cast<float>(acc[i] / norm);
  return Embedding(std::move(out));
}

std::string ToyCodec::describe() const {
  return "toy-ngram-hash(d=" + std::to_string(config_.dimension) +
         ",bucket_seed=" + to_hex(config_.bucket_seed) +
         ",sign_seed=" + to_hex(config_.sign_seed) + ")";
}

}  // namespace clm
