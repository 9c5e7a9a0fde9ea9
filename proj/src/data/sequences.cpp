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

#include "clm/data/sequences.hpp"

#include <algorithm>
#include <functional>

#include "clm/common/error.hpp"
#include "clm/common/parallel.hpp"

namespace clm {

ConceptSequence build_pretrain_sequence(const Document& doc, const Segmenter& segmenter, const ConceptCodec& codec,
                                        const SentinelSet& sentinels, EotLanguage eot) {
  return sequence_from_sentences({doc.id, doc.lang, segmenter(doc.text)}, codec, sentinels, eot);
}

ConceptSequence sequence_from_sentences(const SegmentedDocument& doc, const ConceptCodec& codec,
                                        const SentinelSet& sentinels, EotLanguage eot) {
  ConceptSequence seq{doc.id, doc.lang, {}, doc.sentences};
  if (seq.texts.empty()) fail(ErrorCode::kEmptyDocument, "document '" + doc.id + "' has no sentences");
  seq.embeddings.reserve(seq.texts.size() + 1);
  for (const auto& s : seq.texts) seq.embeddings.push_back(codec.encode(s, doc.lang));
  const Sentinel& end = sentinels.eot(eot == EotLanguage::kDocument ? std::string_view(doc.lang) : "eng_Latn");
  seq.texts.push_back(end.text);
  seq.embeddings.push_back(end.embedding);
  return seq;
}

std::vector<ConceptSequence> window_sequence(const ConceptSequence& seq, std::size_t window) {
  if (window == 0) fail(ErrorCode::kInvalidConfig, "window size must be >= 1");
  if (seq.embeddings.size() <= window) return {seq};
  std::vector<ConceptSequence> out;
  for (std::size_t start = 0, k = 0; start < seq.embeddings.size(); start += window, ++k) {
    const std::size_t end = std::min(start + window, seq.embeddings.size());
    ConceptSequence w;
    w.doc_id = k == 0 ? seq.doc_id : seq.doc_id + "#w" + std::to_string(k);
    w.lang = seq.lang;
    w.embeddings.assign(seq.embeddings.begin() + start, seq.embeddings.begin() + end);
    w.texts.assign(seq.texts.begin() + start, seq.texts.begin() + end);
    out.push_back(std::move(w));
  }
  return out;
}

namespace {

template <typename Doc>
PretrainCorpus build_corpus(const std::vector<Doc>& docs, std::size_t window, std::size_t workers,
                            const std::function<ConceptSequence(const Doc&)>& build) {
  std::vector<std::vector<ConceptSequence>> per_doc(docs.size());
  std::vector<char> empty(docs.size(), 0);
  parallel_for(docs.size(), workers, [&](std::size_t i) {
    try {
      per_doc[i] = window_sequence(build(docs[i]), window);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyDocument) throw;
      empty[i] = 1;
    }
  });
  PretrainCorpus out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (empty[i]) out.skipped.push_back(docs[i].id);
    for (auto& s : per_doc[i]) out.sequences.push_back(std::move(s));
  }
  return out;
}

}  // namespace

PretrainCorpus build_pretrain_corpus(const std::vector<Document>& docs, const Segmenter& segmenter,
                                     const ConceptCodec& codec, const SentinelSet& sentinels, std::size_t window,
                                     std::size_t workers, EotLanguage eot) {
  return build_corpus<Document>(docs, window, workers, [&](const Document& d) {
    return build_pretrain_sequence(d, segmenter, codec, sentinels, eot);
  });
}

PretrainCorpus build_pretrain_corpus(const std::vector<SegmentedDocument>& docs, const ConceptCodec& codec,
                                     const SentinelSet& sentinels, std::size_t window, std::size_t workers,
                                     EotLanguage eot) {
  return build_corpus<SegmentedDocument>(docs, window, workers, [&](const SegmentedDocument& d) {
    return sequence_from_sentences(d, codec, sentinels, eot);
  });
}

std::vector<InstructionInstance> expand_conversation(const Conversation& conv, const Segmenter& segmenter,
                                                     const ConceptCodec& codec, const SentinelSet& sentinels) {
  if (conv.turns.empty() || conv.turns.size() % 2 != 0) {
    fail(ErrorCode::kMalformedConversation,
         "conversation '" + conv.id + "' must hold user/assistant pairs, got " + std::to_string(conv.turns.size()) +
             " turns");
  }
  for (std::size_t i = 0; i < conv.turns.size(); ++i) {
    const char* expected = i % 2 == 0 ? "user" : "assistant";
    if (conv.turns[i].role != expected) {
      fail(ErrorCode::kMalformedConversation, "conversation '" + conv.id + "' turn " + std::to_string(i) +
                                                  " has role '" + conv.turns[i].role + "', expected '" + expected +
                                                  "'");
    }
  }

  const Sentinel& user = sentinels.user_turn(conv.lang);
  const Sentinel& assistant = sentinels.assistant_turn(conv.lang);
  const Sentinel& eot = sentinels.eot(conv.lang);

  std::vector<Embedding> history;
  std::vector<std::string> history_texts;
  auto push = [&](const std::string& text, const Embedding& e) {
    history_texts.push_back(text);
    history.push_back(e);
  };

  std::vector<InstructionInstance> out;
  for (std::size_t i = 0; i < conv.turns.size(); i += 2) {
    push(user.text, user.embedding);
    for (const auto& s : segmenter(conv.turns[i].text)) push(s, codec.encode(s, conv.lang));
    push(assistant.text, assistant.embedding);

    InstructionInstance inst;
    inst.id = conv.id + "#t" + std::to_string(i / 2);
    inst.lang = conv.lang;
    inst.source = conv.source;
    inst.context = history;
    inst.context_texts = history_texts;
    for (const auto& s : segmenter(conv.turns[i + 1].text)) {
      inst.target_texts.push_back(s);
      inst.targets.push_back(codec.encode(s, conv.lang));
    }
    // The response joins the history before the end-of-text target is added.
    for (std::size_t j = 0; j < inst.targets.size(); ++j) push(inst.target_texts[j], inst.targets[j]);
    inst.target_texts.push_back(eot.text);
    inst.targets.push_back(eot.embedding);
    inst.loss_mask.assign(inst.context.size(), false);
    inst.loss_mask.resize(inst.context.size() + inst.targets.size(), true);
    out.push_back(std::move(inst));
  }
  return out;
}

InstructionInstance truncate_context(const InstructionInstance& inst, std::size_t max_positions) {
  const std::size_t total = inst.context.size() + inst.targets.size();
  if (total <= max_positions) return inst;
  if (inst.targets.size() + 1 > max_positions) {
    fail(ErrorCode::kContextOverflow, "instance '" + inst.id + "' has " + std::to_string(inst.targets.size()) +
                                          " targets, too many for max_positions " + std::to_string(max_positions));
  }
  const std::size_t drop = total - max_positions;
  InstructionInstance out = inst;
  out.context.erase(out.context.begin(), out.context.begin() + static_cast<std::ptrdiff_t>(drop));
  out.context_texts.erase(out.context_texts.begin(), out.context_texts.begin() + static_cast<std::ptrdiff_t>(drop));
  out.loss_mask.erase(out.loss_mask.begin(), out.loss_mask.begin() + static_cast<std::ptrdiff_t>(drop));
  return out;
}

std::size_t TrainingExample::target_count() const {
  return static_cast<std::size_t>(std::count(loss_mask.begin(), loss_mask.end(), true));
}

TrainingExample to_training_example(const ConceptSequence& seq) {
  TrainingExample ex{seq.doc_id, seq.embeddings, std::vector<bool>(seq.embeddings.size(), true)};
  if (!ex.loss_mask.empty()) ex.loss_mask[0] = false;
  return ex;
}

TrainingExample to_training_example(const InstructionInstance& inst) {
  TrainingExample ex;
  ex.id = inst.id;
  ex.embeddings = inst.context;
  ex.embeddings.insert(ex.embeddings.end(), inst.targets.begin(), inst.targets.end());
  ex.loss_mask = inst.loss_mask;
  if (!ex.loss_mask.empty()) ex.loss_mask[0] = false;
  return ex;
}

}  // namespace clm
