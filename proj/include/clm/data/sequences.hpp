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
#include <string>
#include <vector>

#include "clm/codec/codec.hpp"
#include "clm/codec/embedding.hpp"
#include "clm/codec/sentinels.hpp"
#include "clm/data/corpus.hpp"
#include "clm/segment/segmenter.hpp"

namespace clm {

// A boundary scorer bound to its thresholds.
struct Segmenter {
  const BoundaryScorer& scorer;
  SegmentationConfig config;

  std::vector<std::string> operator()(std::string_view text) const { return split(text, scorer, config); }
};

// Which language's end-of-text sentinel closes a pre-training sequence.
enum class EotLanguage { kDocument, kEnglish };

struct ConceptSequence {
  std::string doc_id;
  std::string lang;
  std::vector<Embedding> embeddings;  // raw codec space
  std::vector<std::string> texts;
};

// Segments, encodes and appends the end-of-text sentinel. Throws
// EmptyDocument when segmentation yields nothing.
ConceptSequence build_pretrain_sequence(const Document& doc, const Segmenter& segmenter, const ConceptCodec& codec,
                                        const SentinelSet& sentinels, EotLanguage eot = EotLanguage::kDocument);

// Same, starting from already segmented sentences.
ConceptSequence sequence_from_sentences(const SegmentedDocument& doc, const ConceptCodec& codec,
                                        const SentinelSet& sentinels, EotLanguage eot = EotLanguage::kDocument);

struct PretrainCorpus {
  std::vector<ConceptSequence> sequences;  // windowed, in document order
  std::vector<std::string> skipped;         // ids of documents with no sentences
};

// Builds every document on up to `workers` threads and merges the results
// in document order, so the output is independent of the worker count.
PretrainCorpus build_pretrain_corpus(const std::vector<Document>& docs, const Segmenter& segmenter,
                                     const ConceptCodec& codec, const SentinelSet& sentinels, std::size_t window,
                                     std::size_t workers, EotLanguage eot = EotLanguage::kDocument);
PretrainCorpus build_pretrain_corpus(const std::vector<SegmentedDocument>& docs, const ConceptCodec& codec,
                                     const SentinelSet& sentinels, std::size_t window, std::size_t workers,
                                     EotLanguage eot = EotLanguage::kDocument);

// Splits into consecutive non-overlapping windows of at most `window`
// sentences. Windows after the first get the id suffix "#w<k>". A sequence
// that already fits is returned unchanged.
std::vector<ConceptSequence> window_sequence(const ConceptSequence& seq, std::size_t window);

struct InstructionInstance {
  std::string id;
  std::string lang;
  std::string source;
  std::vector<Embedding> context;
  std::vector<Embedding> targets;
  std::vector<std::string> context_texts;
  std::vector<std::string> target_texts;
  std::vector<bool> loss_mask;  // over context ++ targets; true on targets only
};

// One instance per assistant turn. Context for turn k is every earlier
// exchange (user sentinel, user sentences, assistant sentinel, assistant
// sentences) followed by the current user block and the assistant
// sentinel; targets are the assistant sentences plus end-of-text. Throws
// MalformedConversation unless roles strictly alternate starting with the
// user and end with the assistant.
std::vector<InstructionInstance> expand_conversation(const Conversation& conv, const Segmenter& segmenter,
                                                     const ConceptCodec& codec, const SentinelSet& sentinels);

// Drops the oldest context rows so that context + targets fits in
// `max_positions`. Throws ContextOverflow when the targets plus one context
// row do not fit.
InstructionInstance truncate_context(const InstructionInstance& inst, std::size_t max_positions);

// The trainer's view of either kind of data: a raw embedding sequence and
// which positions are prediction targets. Position 0 is never a target.
struct TrainingExample {
  std::string id;
  std::vector<Embedding> embeddings;
  std::vector<bool> loss_mask;

  std::size_t target_count() const;
};

TrainingExample to_training_example(const ConceptSequence& seq);
TrainingExample to_training_example(const InstructionInstance& inst);

}  // namespace clm
