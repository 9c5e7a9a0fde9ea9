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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "clm/codec/codec.hpp"
#include "clm/codec/embedding.hpp"
#include "clm/codec/sentinels.hpp"
#include "clm/codec/vocabulary.hpp"
#include "clm/data/normalizer.hpp"
#include "clm/diffusion/diffusion.hpp"
#include "clm/model/two_tower.hpp"

namespace clm {

// Produces the next concept (normalized space) from a normalized context.
class NextConceptPredictor {
 public:
  virtual ~NextConceptPredictor() = default;
  virtual std::size_t max_positions() const = 0;
  virtual Embedding predict(const std::vector<Embedding>& context, std::uint64_t seed) const = 0;
};

// Guided diffusion sampling over a trained model. The model must outlive
// the predictor.
class DiffusionPredictor final : public NextConceptPredictor {
 public:
  DiffusionPredictor(const ConceptDenoiser<float>& model, const NoiseSchedule& schedule, SamplerParams params);

  std::size_t max_positions() const override { return model_.config().max_positions; }
  // Uses `seed` in place of params.seed.
  Embedding predict(const std::vector<Embedding>& context, std::uint64_t seed) const override;

  const SamplerParams& params() const { return params_; }

 private:
  const ConceptDenoiser<float>& model_;
  const NoiseSchedule& schedule_;
  SamplerParams params_;
};

struct GenerationConfig {
  std::size_t max_sentences = 16;
  double eot_threshold = 0.90;
  std::string target_lang = "eng_Latn";
  std::uint64_t seed = 0;
  // Continue from the re-encoded decoded sentence instead of the prediction.
  bool reencode = false;

  void validate() const;
};

enum class StopReason { kEndOfText, kMaxSentences };
std::string_view stop_reason_name(StopReason reason);

struct GenerationResult {
  std::vector<std::string> sentences;
  std::vector<Embedding> embeddings;  // raw space, one per emitted sentence
  StopReason stop_reason = StopReason::kMaxSentences;
};

// cosine(raw, end-of-text embedding for lang) >= threshold. Throws
// DegenerateEmbedding for a zero vector.
bool is_eot(const Embedding& raw, std::string_view lang, const SentinelSet& sentinels, double threshold);

// Seed used for the k-th generated sentence (k from 0).
std::uint64_t sentence_seed(std::uint64_t seed, std::size_t k);

// Autoregressive generation from a normalized context. Each step predicts,
// denormalizes, stops on end-of-text (which is not emitted), otherwise
// decodes against the vocabulary and appends the prediction to the
// context. Throws ContextOverflow unless
// 1 <= context size <= max_positions - max_sentences.
GenerationResult generate(const std::vector<Embedding>& context, const NextConceptPredictor& predictor,
                          const Normalizer& normalizer, const ConceptCodec& codec, const CodecVocabulary& vocab,
                          const SentinelSet& sentinels, const GenerationConfig& config);

}  // namespace clm
