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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "clm/codec/codec.hpp"
#include "clm/codec/sentinels.hpp"
#include "clm/common/error.hpp"
#include "clm/common/rng.hpp"
#include "clm/data/batching.hpp"
#include "clm/data/corpus.hpp"
#include "clm/data/normalizer.hpp"
#include "clm/data/sequences.hpp"
#include "clm/segment/segmenter.hpp"
#include "test_helpers.hpp"

using namespace clm;

namespace {

struct Fixture {
  ToyCodec codec;
  SentinelSet sentinels{codec, load_sentinel_table(std::filesystem::path(CLM_DATA_DIR) / "sentinels.tsv")};
  RuleBoundaryScorer scorer;
  Segmenter segmenter{scorer, SegmentationConfig{}};
};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIoError;
}

bool same(const Embedding& a, const Embedding& b) {
  if (a.dimension() != b.dimension()) return false;
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

bool same_list(const std::vector<Embedding>& a, const std::vector<Embedding>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same(a[i], b[i])) return false;
  }
  return true;
}

// Random conversation with `exchanges` user/assistant pairs; each turn has
// 1 to 3 short sentences.
Conversation random_conversation(Rng& rng, std::size_t exchanges, const std::string& lang) {
  static const std::vector<std::string> words = {"river", "bread", "stone", "garden", "lamp", "window", "cloud"};
  Conversation c{"conv" + std::to_string(rng.uniform_int(1000000)), lang, {}, "synthetic"};
  for (std::size_t e = 0; e < 2 * exchanges; ++e) {
    std::string text;
    const std::size_t n = 1 + rng.uniform_int(3);
    for (std::size_t s = 0; s < n; ++s) {
      if (!text.empty()) text += ' ';
      text += "The " + words[rng.uniform_int(words.size())] + " is number " + std::to_string(rng.uniform_int(100)) +
              ".";
    }
    c.turns.push_back({e % 2 == 0 ? "user" : "assistant", text});
  }
  return c;
}

}  // namespace

TEST_CASE("pre-training sequence construction") {
  Fixture f;
  const Document doc{"d1", "eng_Latn", "The sun rose. Birds sang loudly. Then it rained."};
  const ConceptSequence seq = build_pretrain_sequence(doc, f.segmenter, f.codec, f.sentinels);
  REQUIRE(seq.embeddings.size() == 4);
  REQUIRE(seq.texts.size() == 4);
  const auto direct = f.segmenter(doc.text);
  CHECK(std::vector<std::string>(seq.texts.begin(), seq.texts.begin() + 3) == direct);
  CHECK(seq.texts.back() == f.sentinels.eot("eng_Latn").text);
  CHECK(same(seq.embeddings.back(), f.sentinels.eot_embedding("eng_Latn")));
  CHECK(same(seq.embeddings[1], f.codec.encode(direct[1], "eng_Latn")));

  const Document fr{"d2", "fra_Latn", "Il pleut. Le vent souffle."};
  const ConceptSequence doc_lang = build_pretrain_sequence(fr, f.segmenter, f.codec, f.sentinels);
  CHECK(same(doc_lang.embeddings.back(), f.sentinels.eot_embedding("fra_Latn")));
  const ConceptSequence english =
      build_pretrain_sequence(fr, f.segmenter, f.codec, f.sentinels, EotLanguage::kEnglish);
  CHECK(same(english.embeddings.back(), f.sentinels.eot_embedding("eng_Latn")));

  CHECK(code_of([&] { build_pretrain_sequence({"e", "eng_Latn", "   "}, f.segmenter, f.codec, f.sentinels); }) ==
        ErrorCode::kEmptyDocument);
}

TEST_CASE("corpus building skips empty documents and windows long ones") {
  Fixture f;
  std::vector<SegmentedDocument> docs = {{"a", "eng_Latn", {"One.", "Two.", "Three.", "Four.", "Five."}},
                                         {"empty", "eng_Latn", {}},
                                         {"b", "eng_Latn", {"Alpha."}}};
  const PretrainCorpus corpus = build_pretrain_corpus(docs, f.codec, f.sentinels, 4, 2);
  CHECK(corpus.skipped == std::vector<std::string>{"empty"});
  REQUIRE(corpus.sequences.size() == 3);
  CHECK(corpus.sequences[0].doc_id == "a");
  CHECK(corpus.sequences[0].embeddings.size() == 4);
  CHECK(corpus.sequences[1].doc_id == "a#w1");
  CHECK(corpus.sequences[1].texts ==
        std::vector<std::string>{"Five.", f.sentinels.eot("eng_Latn").text});
  CHECK(corpus.sequences[2].doc_id == "b");

  // Worker count never changes the result.
  const PretrainCorpus serial = build_pretrain_corpus(docs, f.codec, f.sentinels, 4, 1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(same_list(serial.sequences[i].embeddings, corpus.sequences[i].embeddings));
}

TEST_CASE("one-exchange conversation layout") {
  Fixture f;
  const Conversation conv{"c", "eng_Latn", {{"user", "Hello there."}, {"assistant", "Hi. How can I help?"}}, "toy"};
  const auto inst = expand_conversation(conv, f.segmenter, f.codec, f.sentinels);
  REQUIRE(inst.size() == 1);
  CHECK(inst[0].context.size() == 3);
  CHECK(inst[0].targets.size() == 3);
  CHECK(inst[0].context_texts ==
        std::vector<std::string>{f.sentinels.user_turn("eng_Latn").text, "Hello there.",
                                 f.sentinels.assistant_turn("eng_Latn").text});
  CHECK(inst[0].target_texts == std::vector<std::string>{"Hi.", "How can I help?", f.sentinels.eot("eng_Latn").text});
  CHECK(inst[0].loss_mask == std::vector<bool>{false, false, false, true, true, true});
  CHECK(inst[0].source == "toy");
}

TEST_CASE("sentinels follow the conversation language with an English fallback") {
  Fixture f;
  const Conversation fr{"c", "fra_Latn", {{"user", "Bonjour."}, {"assistant", "Salut."}}, ""};
  const auto a = expand_conversation(fr, f.segmenter, f.codec, f.sentinels);
  CHECK(a[0].context_texts.front() == f.sentinels.user_turn("fra_Latn").text);
  CHECK(f.sentinels.user_turn("fra_Latn").text != f.sentinels.user_turn("eng_Latn").text);

  const Conversation nl{"c", "nld_Latn", {{"user", "Hallo."}, {"assistant", "Dag."}}, ""};
  const auto b = expand_conversation(nl, f.segmenter, f.codec, f.sentinels);
  CHECK(b[0].context_texts.front() == f.sentinels.user_turn("eng_Latn").text);
  CHECK(same(b[0].targets.back(), f.sentinels.eot_embedding("eng_Latn")));
}

TEST_CASE("malformed conversations are rejected") {
  Fixture f;
  const Conversation starts_wrong{"c", "eng_Latn", {{"assistant", "Hi."}, {"user", "Hello."}}, ""};
  const Conversation repeated{"c", "eng_Latn", {{"user", "A."}, {"user", "B."}}, ""};
  const Conversation odd{"c", "eng_Latn", {{"user", "A."}, {"assistant", "B."}, {"user", "C."}}, ""};
  for (const auto* c : {&starts_wrong, &repeated, &odd}) {
    CHECK(code_of([&] { expand_conversation(*c, f.segmenter, f.codec, f.sentinels); }) ==
          ErrorCode::kMalformedConversation);
  }
}

TEST_CASE("three-exchange expansion grows contexts by exact list concatenation") {
  Fixture f;
  Rng rng(3);
  const Conversation conv = random_conversation(rng, 3, "eng_Latn");
  const auto inst = expand_conversation(conv, f.segmenter, f.codec, f.sentinels);
  REQUIRE(inst.size() == 3);
  for (std::size_t k = 1; k < 3; ++k) {
    std::vector<Embedding> expected = inst[k - 1].context;
    expected.insert(expected.end(), inst[k - 1].targets.begin(), inst[k - 1].targets.end() - 1);
    expected.push_back(f.sentinels.user_turn("eng_Latn").embedding);
    for (const auto& s : f.segmenter(conv.turns[2 * k].text)) expected.push_back(f.codec.encode(s, "eng_Latn"));
    expected.push_back(f.sentinels.assistant_turn("eng_Latn").embedding);
    CHECK(same_list(inst[k].context, expected));
    CHECK(inst[k].id == conv.id + "#t" + std::to_string(k));
  }
}

TEST_CASE("instruction instances hold their structural properties on random conversations") {
  Fixture f;
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t exchanges = 1 + rng.uniform_int(6);
    const Conversation conv = random_conversation(rng, exchanges, trial % 3 == 0 ? "fra_Latn" : "eng_Latn");
    const auto inst = expand_conversation(conv, f.segmenter, f.codec, f.sentinels);
    REQUIRE(inst.size() == exchanges);
    for (std::size_t k = 0; k < inst.size(); ++k) {
      const auto& in = inst[k];
      CHECK(same(in.context.front(), f.sentinels.user_turn(conv.lang).embedding));
      CHECK(same(in.context.back(), f.sentinels.assistant_turn(conv.lang).embedding));
      CHECK(same(in.targets.back(), f.sentinels.eot_embedding(conv.lang)));
      REQUIRE(in.loss_mask.size() == in.context.size() + in.targets.size());
      for (std::size_t i = 0; i < in.loss_mask.size(); ++i) CHECK(in.loss_mask[i] == (i >= in.context.size()));
      if (k > 0) {
        const auto& prev = inst[k - 1].context;
        REQUIRE(prev.size() < in.context.size());
        CHECK(same_list(prev, {in.context.begin(), in.context.begin() + static_cast<std::ptrdiff_t>(prev.size())}));
      }
    }
  }
}

TEST_CASE("context truncation and training examples") {
  Fixture f;
  Rng rng(5);
  const auto inst = expand_conversation(random_conversation(rng, 3, "eng_Latn"), f.segmenter, f.codec, f.sentinels);
  const auto& last = inst.back();
  const std::size_t total = last.context.size() + last.targets.size();
  CHECK(same_list(truncate_context(last, total).context, last.context));
  const auto cut = truncate_context(last, last.targets.size() + 2);
  REQUIRE(cut.context.size() == 2);
  CHECK(same(cut.context[0], last.context[last.context.size() - 2]));
  CHECK(cut.loss_mask.size() == cut.context.size() + cut.targets.size());
  CHECK(code_of([&] { truncate_context(last, last.targets.size()); }) == ErrorCode::kContextOverflow);

  const TrainingExample ex = to_training_example(last);
  CHECK(ex.embeddings.size() == total);
  CHECK(ex.target_count() == last.targets.size());

  const ConceptSequence seq = build_pretrain_sequence({"d", "eng_Latn", "One. Two."}, f.segmenter, f.codec,
                                                      f.sentinels);
  const TrainingExample pre = to_training_example(seq);
  CHECK(pre.loss_mask == std::vector<bool>{false, true, true});
}

TEST_CASE("normalizer fit, apply and invert") {
  SUBCASE("five-point set against the sort-based percentile oracle") {
    std::vector<Embedding> pts;
    for (float v : {4.0f, 100.0f, 1.0f, 3.0f, 2.0f}) pts.emplace_back(std::vector<float>{v});
    const Normalizer n = Normalizer::fit(pts);
    CHECK(n.center()[0] == 3.0);
    // Linear interpolation on the sorted set: q25 = 2, q75 = 4.
    CHECK(n.scale()[0] == static_cast<double>(static_cast<float>(2.0 / 1.349)));
    CHECK(sorted_percentile({1, 2, 3, 4, 100}, 0.25) == 2.0);
    CHECK(sorted_percentile({1, 2, 3, 4, 100}, 0.75) == 4.0);
    CHECK(sorted_percentile({1, 2, 3, 4}, 0.5) == 2.5);
  }
  SUBCASE("constant dimension hits the floor without blowing up") {
    std::vector<Embedding> pts;
    for (int i = 0; i < 10; ++i) pts.emplace_back(std::vector<float>{0.5f, static_cast<float>(i)});
    const Normalizer n = Normalizer::fit(pts);
    CHECK(n.scale()[0] == static_cast<double>(static_cast<float>(kNormalizerScaleFloor)));
    const Embedding z = n.apply(Embedding(std::vector<float>{0.5f, 3.0f}));
    CHECK(z[0] == 0.0f);
    CHECK(std::isfinite(z[1]));
  }
  SUBCASE("zero interquartile range falls back to the standard deviation") {
    std::vector<Embedding> pts;
    for (float v : {0.0f, 0.0f, 0.0f, 0.0f, 0.0f, 0.0f, 2.0f, -2.0f}) pts.emplace_back(std::vector<float>{v});
    const Normalizer with_std = Normalizer::fit(pts, ZeroIqrFallback::kStd);
    CHECK(with_std.scale()[0] == static_cast<double>(static_cast<float>(1.0)));
    const Normalizer floored = Normalizer::fit(pts, ZeroIqrFallback::kNone);
    CHECK(floored.scale()[0] == static_cast<double>(static_cast<float>(kNormalizerScaleFloor)));
  }
  SUBCASE("invert undoes apply") {
    Rng rng(4);
    std::vector<Embedding> pts;
    for (int i = 0; i < 200; ++i) {
      std::vector<float> v(8);
      for (float& x : v) x = static_cast<float>(rng.normal() * 0.3 + 0.1);
      pts.emplace_back(std::move(v));
    }
    const Normalizer n = Normalizer::fit(pts);
    for (const auto& e : pts) {
      const Embedding back = n.invert(n.apply(e));
      for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(back[i] - e[i]) <= 1e-6);
    }
  }
  SUBCASE("too few samples") {
    CHECK(code_of([] { Normalizer::fit({Embedding(std::vector<float>{1.0f})}); }) == ErrorCode::kInsufficientData);
  }
}

TEST_CASE("normalizer file round trip and corruption") {
  testing::TempDir dir("normalizer");
  const Normalizer n({0.5, -1.25}, {2.0, 0.125});
  n.save(dir / "n.clmn");
  const Normalizer m = Normalizer::load(dir / "n.clmn");
  CHECK(m.center() == n.center());
  CHECK(m.scale() == n.scale());
  CHECK(std::filesystem::file_size(dir / "n.clmn") == 4 + 4 + 2 * 4 * 2);

  std::ofstream(dir / "n.clmn", std::ios::app | std::ios::binary) << 'x';
  CHECK_THROWS_AS(Normalizer::load(dir / "n.clmn"), Error);
  CHECK_THROWS_AS(Normalizer({0.0}, {0.0}), Error);
}

TEST_CASE("normalized corpus is centred") {
  Fixture f;
  const auto docs = read_documents(std::filesystem::path(CLM_DATA_DIR) / "toy" / "corpus.jsonl");
  const auto corpus = build_pretrain_corpus(docs, f.segmenter, f.codec, f.sentinels, 128, 1);
  std::vector<Embedding> all;
  for (const auto& s : corpus.sequences) all.insert(all.end(), s.embeddings.begin(), s.embeddings.end());
  const Normalizer n = fit_normalizer(all, 100000, 0);
  for (std::size_t d = 0; d < f.codec.dimension(); ++d) {
    std::vector<double> col;
    for (const auto& e : all) col.push_back(n.apply(e)[d]);
    std::sort(col.begin(), col.end());
    CHECK(std::abs(sorted_percentile(col, 0.5)) < 0.05);
  }
}

TEST_CASE("reservoir sampling") {
  ReservoirSampler r(5, 1);
  for (int i = 0; i < 3; ++i) r.offer(Embedding(std::vector<float>{static_cast<float>(i)}));
  CHECK(r.sample().size() == 3);
  for (int i = 3; i < 1000; ++i) r.offer(Embedding(std::vector<float>{static_cast<float>(i)}));
  CHECK(r.sample().size() == 5);
  CHECK(r.seen() == 1000);

  // Each item is kept with probability capacity / n.
  std::vector<int> hits(20, 0);
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    ReservoirSampler s(5, seed);
    for (int i = 0; i < 20; ++i) s.offer(Embedding(std::vector<float>{static_cast<float>(i)}));
    for (const auto& e : s.sample()) ++hits[static_cast<std::size_t>(e[0])];
  }
  for (int h : hits) CHECK(std::abs(h / 4000.0 - 0.25) < 0.04);
}

TEST_CASE("batching") {
  const std::vector<std::size_t> sizes = {4, 4, 4};
  CHECK(batch_by_budget(sizes, 10) == BatchPlan{{0, 1}, {2}});
  const std::vector<std::size_t> exact = {10};
  CHECK(batch_by_budget(exact, 10) == BatchPlan{{0}});
  const std::vector<std::size_t> mixed = {6, 5, 3, 4};
  CHECK(batch_by_budget(mixed, 10) == BatchPlan{{0, 2}, {1, 3}});
  const std::vector<std::size_t> too_big = {11};
  CHECK(code_of([&] { batch_by_budget(too_big, 10); }) == ErrorCode::kInvalidConfig);

  const BatchPlan plan = batch_by_count(1025, 512);
  REQUIRE(plan.size() == 3);
  CHECK(plan[0].size() == 512);
  CHECK(plan[1].size() == 512);
  CHECK(plan[2].size() == 1);
  CHECK(plan[2][0] == 1024);
}

TEST_CASE("corpus readers report the offending line") {
  testing::TempDir dir("corpus");
  std::ofstream(dir / "bad.jsonl") << "{\"id\": \"a\", \"lang\": \"eng_Latn\", \"text\": \"ok\"}\n{oops\n";
  try {
    read_documents(dir / "bad.jsonl");
    FAIL("expected FormatError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormatError);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  const std::vector<Conversation> convs = {{"c", "eng_Latn", {{"user", "A."}, {"assistant", "B."}}, "s"}};
  write_conversations(dir / "c.jsonl", convs);
  const auto back = read_conversations(dir / "c.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0].turns[1].text == "B.");
  CHECK(back[0].source == "s");
}
