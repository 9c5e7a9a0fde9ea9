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

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

#include "clm/codec/embedding.hpp"

namespace clm {

// Sentence -> embedding encoder. Implementations are immutable after
// construction and safe to share across threads.
class ConceptCodec {
 public:
  virtual ~ConceptCodec() = default;

  virtual std::size_t dimension() const = 0;

  // Throws InvalidSentence for blank text and UnknownLanguage for tags the
  // codec does not accept.
  virtual Embedding encode(std::string_view text, std::string_view lang) const = 0;

  // Identifies the codec and every parameter that affects its output
  // (e.g. hash seeds). Recorded in output artifacts.
  virtual std::string describe() const = 0;
};

// Shared precondition check for encode implementations.
void validate_encode_input(std::string_view text, std::string_view lang,
                           const std::set<std::string, std::less<>>& languages);

struct ToyCodecConfig {
  std::size_t dimension = 64;
  std::uint64_t bucket_seed = 0x9E3779B97F4A7C15ULL;
  std::uint64_t sign_seed = 0xD1B54A32D192ED03ULL;
};

// Deterministic stand-in encoder: signed feature hashing of the character
// 1-, 2- and 3-grams of "lang|text", L2-normalized. Each n-gram is keyed by
// FNV-1a over (n, utf8 bytes); the bucket comes from mix64(key ^ bucket_seed)
// and the sign from the low bit of mix64(key ^ sign_seed).
class ToyCodec final : public ConceptCodec {
 public:
  explicit ToyCodec(ToyCodecConfig config = {});
  ToyCodec(ToyCodecConfig config, std::set<std::string, std::less<>> languages);

  std::size_t dimension() const override { return config_.dimension; }
  Embedding encode(std::string_view text, std::string_view lang) const override;
  std::string describe() const override;

  const ToyCodecConfig& config() const { return config_; }

 private:
  ToyCodecConfig config_;
  std::set<std::string, std::less<>> languages_;
};

}  // namespace clm
