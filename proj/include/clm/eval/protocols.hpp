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
#include <filesystem>
#include <string>
#include <vector>

#include "clm/codec/codec.hpp"
#include "clm/codec/sentinels.hpp"
#include "clm/codec/vocabulary.hpp"
#include "clm/data/corpus.hpp"
#include "clm/data/normalizer.hpp"
#include "clm/data/sequences.hpp"
#include "clm/eval/metrics.hpp"
#include "clm/generate/generator.hpp"

namespace clm {

// Indices of the first `n_docs` entries (stream order) with at least
// `min_sentences` sentences.
std::vector<std::size_t> select_documents(const std::vector<std::size_t>& sentence_counts, std::size_t min_sentences,
                                          std::size_t n_docs);

struct PrefixEvalConfig {
  std::size_t min_sentences = 9;
  std::size_t n_docs = 1000;
  std::uint64_t seed = 0;
  bool normalized_space = false;  // compare in normalizer space instead of raw
  // Generation cap per prefix. Each prefix is scored on one predicted
  // sentence, so only 1 is accepted.
  std::size_t max_sentences = 1;
};

struct PrefixEvalResult {
  std::vector<EvalRecord> records;  // L2 and RT_L2 per (document, k)
  std::vector<std::string> selected;
};

// For every selected document with n sentences and every k in 1..n-1,
// predicts sentence k+1 from the first k (normalized) and scores it.
// Contexts longer than max_positions - 1 keep their newest sentences.
// Throws EmptyEvalSet when no document qualifies; warns when fewer than
// n_docs do.
PrefixEvalResult prefix_eval(const std::vector<SegmentedDocument>& docs, const NextConceptPredictor& predictor,
                             const Normalizer& normalizer, const ConceptCodec& codec, const CodecVocabulary& vocab,
                             const PrefixEvalConfig& config);

struct InstructEvalConfig {
  std::size_t max_sentences = 16;
  double eot_threshold = 0.90;
  std::uint64_t seed = 0;
};

// Generates a response for every expanded instance and scores it with
// ROUGE-L against the reference response. Records carry the instance id.
std::vector<EvalRecord> instruct_eval(const std::vector<Conversation>& convs, const Segmenter& segmenter,
                                      const NextConceptPredictor& predictor, const Normalizer& normalizer,
                                      const ConceptCodec& codec, const CodecVocabulary& vocab,
                                      const SentinelSet& sentinels, const InstructEvalConfig& config);

// Mean cosine(encode(eng, eng_Latn), encode(text, lang)) over the first
// `per_lang_cap` pairs of each language. One record per scored pair;
// languages listed in `languages` without pairs are skipped with a
// warning.
std::vector<EvalRecord> alignment_pilot(const std::vector<ParallelPair>& pairs, const ConceptCodec& codec,
                                        std::size_t per_lang_cap = 1000,
                                        const std::vector<std::string>& languages = {});

struct Aggregate {
  std::string lang;  // "all" for the overall rows
  Metric metric = Metric::kL2;
  std::size_t count = 0;
  double mean = 0.0;
};

// Overall rows first (by metric), then per-language rows sorted by
// (lang, metric). Throws EmptyEvalSet on empty input.
std::vector<Aggregate> aggregate(const std::vector<EvalRecord>& records);

// Provenance stamped into every report.
struct ReportMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
};

// Writes report.json (meta, aggregates, records), report.csv (overall
// rows) and report_by_language.csv into out_dir.
void emit_report(const std::vector<EvalRecord>& records, const std::filesystem::path& out_dir,
                 const ReportMeta& meta);

}  // namespace clm
