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

#include "clm/generate/generator.hpp"

#include "clm/common/error.hpp"
#include "clm/common/hash.hpp"
#include "clm/nn/ops.hpp"

namespace clm {

using nn::Tensor;

DiffusionPredictor::DiffusionPredictor(const ConceptDenoiser<float>& model, const NoiseSchedule& schedule,
                                       SamplerParams params)
    : model_(model), schedule_(schedule), params_(params) {
  params_.validate();
  if (schedule.t_train() != model.config().t_train) {
    fail(ErrorCode::kInvalidConfig, "noise schedule and model disagree on t_train");
  }
}

Embedding DiffusionPredictor::predict(const std::vector<Embedding>& context, std::uint64_t seed) const {
  const std::size_t d = model_.config().d_embedding;
  if (context.empty()) fail(ErrorCode::kContextOverflow, "prediction needs at least one context sentence");
  nn::NoGradGuard no_grad;
  std::vector<float> flat;
  flat.reserve(context.size() * d);
  for (const auto& e : context) {
    if (e.dimension() != d) fail(ErrorCode::kDimensionMismatch, "context embedding has the wrong dimension");
    flat.insert(flat.end(), e.values().begin(), e.values().end());
  }
  const Tensor<float> ctx = model_.encode_context(Tensor<float>::from({context.size(), d}, std::move(flat)));
  const std::size_t position = context.size();
  auto branch = [&](bool conditional) {
    return [&, conditional](std::span<const float> x, std::size_t t) {
      const Tensor<float> xt = Tensor<float>::from({1, d}, std::vector<float>(x.begin(), x.end()));
      const Tensor<float> out =
          model_.denoise(xt, {DenoiseRow{t, position, conditional}}, conditional ? ctx : Tensor<float>());
      return std::vector<float>(out.data().begin(), out.data().end());
    };
  };
  SamplerParams p = params_;
  p.seed = seed;
  return Embedding(sample_next_concept(d, schedule_, p, branch(true), branch(false)));
}

void GenerationConfig::validate() const {
  if (max_sentences == 0) fail(ErrorCode::kInvalidConfig, "max_sentences must be >= 1");
  if (!(eot_threshold > 0.0 && eot_threshold <= 1.0)) fail(ErrorCode::kInvalidConfig, "eot_threshold must lie in (0, 1]");
}

std::string_view stop_reason_name(StopReason reason) {
  return reason == StopReason::kEndOfText ? "EOT" : "MAX_SENTENCES";
}

bool is_eot(const Embedding& raw, std::string_view lang, const SentinelSet& sentinels, double threshold) {
  return cosine(raw, sentinels.eot_embedding(lang)) >= threshold;
}

std::uint64_t sentence_seed(std::uint64_t seed, std::size_t k) { return hash_combine(seed, k); }

GenerationResult generate(const std::vector<Embedding>& context, const NextConceptPredictor& predictor,
                          const Normalizer& normalizer, const ConceptCodec& codec, const CodecVocabulary& vocab,
                          const SentinelSet& sentinels, const GenerationConfig& config) {
  config.validate();
  const std::size_t cap = predictor.max_positions();
  if (context.empty() || config.max_sentences > cap || context.size() > cap - config.max_sentences) {
    fail(ErrorCode::kContextOverflow, "context of " + std::to_string(context.size()) + " sentences plus " +
                                          std::to_string(config.max_sentences) + " generated exceeds max_positions " +
                                          std::to_string(cap));
  }
  GenerationResult result;
  std::vector<Embedding> state = context;
  for (std::size_t k = 0; k < config.max_sentences; ++k) {
    const Embedding predicted = predictor.predict(state, sentence_seed(config.seed, k));
    const Embedding raw = normalizer.invert(predicted);
    if (is_eot(raw, config.target_lang, sentinels, config.eot_threshold)) {
      result.stop_reason = StopReason::kEndOfText;
      return result;
    }
    std::string text = decode(raw, config.target_lang, vocab);
    state.push_back(config.reencode ? normalizer.apply(codec.encode(text, config.target_lang)) : predicted);
    result.sentences.push_back(std::move(text));
    result.embeddings.push_back(raw);
  }
  result.stop_reason = StopReason::kMaxSentences;
  return result;
}

}  // namespace clm
