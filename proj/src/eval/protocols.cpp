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

#include "clm/eval/protocols.hpp"

#include <cstdio>
#include <json.hpp>
#include <map>
#include <spdlog/spdlog.h>

#include "clm/common/binary_io.hpp"
#include "clm/common/error.hpp"
#include "clm/common/hash.hpp"

namespace clm {

using nlohmann::json;

std::vector<std::size_t> select_documents(const std::vector<std::size_t>& sentence_counts, std::size_t min_sentences,
                                          std::size_t n_docs) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < sentence_counts.size() && out.size() < n_docs; ++i) {
    if (sentence_counts[i] >= min_sentences) out.push_back(i);
  }
  return out;
}

PrefixEvalResult prefix_eval(const std::vector<SegmentedDocument>& docs, const NextConceptPredictor& predictor,
                             const Normalizer& normalizer, const ConceptCodec& codec, const CodecVocabulary& vocab,
                             const PrefixEvalConfig& config) {
  if (config.min_sentences < 2) fail(ErrorCode::kInvalidConfig, "prefix evaluation needs min_sentences >= 2");
  if (config.max_sentences != 1) {
    fail(ErrorCode::kInvalidConfig, "prefix evaluation scores exactly one predicted sentence per prefix");
  }
  std::vector<std::size_t> counts;
  for (const auto& d : docs) counts.push_back(d.sentences.size());
  const auto chosen = select_documents(counts, config.min_sentences, config.n_docs);
  if (chosen.empty()) {
    fail(ErrorCode::kEmptyEvalSet, "no document has at least " + std::to_string(config.min_sentences) + " sentences");
  }
  if (chosen.size() < config.n_docs) {
    spdlog::warn("prefix evaluation: only {} of the requested {} documents qualify", chosen.size(), config.n_docs);
  }
  const std::size_t window = predictor.max_positions() - 1;

  PrefixEvalResult result;
  for (std::size_t idx : chosen) {
    const auto& doc = docs[idx];
    result.selected.push_back(doc.id);
    std::vector<Embedding> raw, norm;
    for (const auto& s : doc.sentences) {
      raw.push_back(codec.encode(s, doc.lang));
      norm.push_back(normalizer.apply(raw.back()));
    }
    const std::uint64_t doc_seed = hash_combine(config.seed, fnv1a64(doc.id));
    for (std::size_t k = 1; k < raw.size(); ++k) {
      const std::size_t begin = k > window ? k - window : 0;
      const std::vector<Embedding> context(norm.begin() + static_cast<std::ptrdiff_t>(begin),
                                           norm.begin() + static_cast<std::ptrdiff_t>(k));
      const Embedding predicted = predictor.predict(context, sentence_seed(doc_seed, k));
      const Embedding pred_raw = normalizer.invert(predicted);
      const Embedding rt = codec.encode(decode(pred_raw, doc.lang, vocab), doc.lang);
      double value_l2, value_rt;
      if (config.normalized_space) {
        value_l2 = l2(predicted, norm[k]);
        value_rt = l2(normalizer.apply(rt), norm[k]);
      } else {
        value_l2 = l2(pred_raw, raw[k]);
        value_rt = l2(rt, raw[k]);
      }
      result.records.push_back({doc.id, doc.lang, k, Metric::kL2, value_l2});
      result.records.push_back({doc.id, doc.lang, k, Metric::kRoundTripL2, value_rt});
    }
  }
  return result;
}

std::vector<EvalRecord> instruct_eval(const std::vector<Conversation>& convs, const Segmenter& segmenter,
                                      const NextConceptPredictor& predictor, const Normalizer& normalizer,
                                      const ConceptCodec& codec, const CodecVocabulary& vocab,
                                      const SentinelSet& sentinels, const InstructEvalConfig& config) {
  std::vector<EvalRecord> records;
  const std::size_t max_context = predictor.max_positions() - config.max_sentences;
  for (const auto& conv : convs) {
    for (const auto& inst : expand_conversation(conv, segmenter, codec, sentinels)) {
      std::vector<Embedding> context;
      const std::size_t begin = inst.context.size() > max_context ? inst.context.size() - max_context : 0;
      for (std::size_t j = begin; j < inst.context.size(); ++j) context.push_back(normalizer.apply(inst.context[j]));
      GenerationConfig gen;
      gen.max_sentences = config.max_sentences;
      gen.eot_threshold = config.eot_threshold;
      gen.target_lang = inst.lang;
      gen.seed = hash_combine(config.seed, fnv1a64(inst.id));
      const auto out = generate(context, predictor, normalizer, codec, vocab, sentinels, gen);
      std::string candidate, reference;
      for (const auto& s : out.sentences) candidate += (candidate.empty() ? "" : " ") + s;
      for (std::size_t j = 0; j + 1 < inst.target_texts.size(); ++j) {
        reference += (reference.empty() ? "" : " ") + inst.target_texts[j];
      }
      records.push_back({inst.id, inst.lang, 0, Metric::kRougeL, rouge_l(candidate, reference)});
    }
  }
  return records;
}

std::vector<EvalRecord> alignment_pilot(const std::vector<ParallelPair>& pairs, const ConceptCodec& codec,
                                        std::size_t per_lang_cap, const std::vector<std::string>& languages) {
  if (pairs.empty()) fail(ErrorCode::kEmptyEvalSet, "alignment pilot needs at least one parallel pair");
  std::map<std::string, std::size_t> taken;
  std::vector<EvalRecord> records;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    auto& n = taken[p.lang];
    if (n >= per_lang_cap) continue;
    ++n;
    const double c = cosine(codec.encode(p.eng, "eng_Latn"), codec.encode(p.text, p.lang));
    records.push_back({"pair" + std::to_string(i), p.lang, 0, Metric::kCosineAlign, c});
  }
  for (const auto& lang : languages) {
    if (!taken.contains(lang)) spdlog::warn("alignment pilot: no pairs for {}, skipped", lang);
  }
  return records;
}

std::vector<Aggregate> aggregate(const std::vector<EvalRecord>& records) {
  if (records.empty()) fail(ErrorCode::kEmptyEvalSet, "no evaluation records");
  struct Acc {
    std::size_t n = 0;
    double sum = 0.0;
  };
  std::map<Metric, Acc> overall;
  std::map<std::pair<std::string, Metric>, Acc> by_lang;
  for (const auto& r : records) {
    if (!std::isfinite(r.value)) fail(ErrorCode::kNumericalError, "non-finite metric value for " + r.doc_id);
    auto& o = overall[r.metric];
    ++o.n;
    o.sum += r.value;
    auto& l = by_lang[{r.lang, r.metric}];
    ++l.n;
    l.sum += r.value;
  }
  std::vector<Aggregate> out;
  for (const auto& [m, a] : overall) out.push_back({"all", m, a.n, a.sum / static_cast<double>(a.n)});
  for (const auto& [key, a] : by_lang) out.push_back({key.first, key.second, a.n, a.sum / static_cast<double>(a.n)});
  return out;
}

namespace {

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json meta_json(const ReportMeta& meta) {
  return {{"config_hash", meta.config_hash}, {"seed", meta.seed}, {"version", meta.version}};
}

}  // namespace

void emit_report(const std::vector<EvalRecord>& records, const std::filesystem::path& out_dir,
                 const ReportMeta& meta) {
  const auto aggs = aggregate(records);
  std::filesystem::create_directories(out_dir);

  json j;
  j["meta"] = meta_json(meta);
  j["overall"] = json::array();
  j["by_language"] = json::array();
  for (const auto& a : aggs) {
    json row{{"lang", a.lang}, {"metric", metric_name(a.metric)}, {"count", a.count}, {"mean", a.mean}};
    (a.lang == "all" ? j["overall"] : j["by_language"]).push_back(std::move(row));
  }
  j["records"] = json::array();
  for (const auto& r : records) {
    j["records"].push_back({{"doc_id", r.doc_id},
                            {"lang", r.lang},
                            {"prefix_len", r.prefix_len},
                            {"metric", metric_name(r.metric)},
                            {"value", r.value}});
  }
  binio::write_atomically(out_dir / "report.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });

  const std::string stamp = "# config_hash=" + meta.config_hash + " seed=" + std::to_string(meta.seed) +
                            " version=" + meta.version + "\n";
  binio::write_atomically(out_dir / "report.csv", [&](std::ostream& out) {
    out << stamp << "metric,count,mean\n";
    for (const auto& a : aggs) {
      if (a.lang == "all") out << metric_name(a.metric) << ',' << a.count << ',' << number(a.mean) << '\n';
    }
  });
  binio::write_atomically(out_dir / "report_by_language.csv", [&](std::ostream& out) {
    out << stamp << "lang,metric,count,mean\n";
    for (const auto& a : aggs) {
      if (a.lang != "all") out << a.lang << ',' << metric_name(a.metric) << ',' << a.count << ',' << number(a.mean) << '\n';
    }
  });
}

}  // namespace clm
