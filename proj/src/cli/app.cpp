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

#include "clm/cli/app.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <csignal>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "clm/cli/config.hpp"
#include "clm/codec/codec.hpp"
#include "clm/codec/embedding_cache.hpp"
#include "clm/codec/languages.hpp"
#include "clm/codec/sentinels.hpp"
#include "clm/codec/socket_codec.hpp"
#include "clm/codec/vocabulary.hpp"
#include "clm/common/binary_io.hpp"
#include "clm/common/error.hpp"
#include "clm/common/parallel.hpp"
#include "clm/data/corpus.hpp"
#include "clm/data/normalizer.hpp"
#include "clm/data/sequences.hpp"
#include "clm/eval/protocols.hpp"
#include "clm/generate/generator.hpp"
#include "clm/nn/parameters.hpp"
#include "clm/segment/chinese_script.hpp"
#include "clm/train/trainer.hpp"

namespace clm::cli {

std::string version() { return CLM_VERSION; }

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

// File names inside a build-data directory.
constexpr const char* kSegmentedFile = "segmented.jsonl";
constexpr const char* kConversationsFile = "conversations.jsonl";
constexpr const char* kVocabFile = "vocab.tsv";
constexpr const char* kCacheFile = "embeddings.clm1";
constexpr const char* kNormalizerFile = "normalizer.clmn";
constexpr const char* kStatsFile = "stats.json";

void require_path(const std::string& flag, const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorCode::kInvalidConfig, flag + ": path does not exist: " + path.string());
}

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  bool deterministic = false;
};

class Context {
 public:
  Context(const CommonOptions& opts, std::string command) : command_(std::move(command)) {
    ConfigValues values;
    if (!opts.config.empty()) values.load_ini(opts.config);
    for (const auto& o : opts.overrides) values.set(std::string_view(o));
    if (opts.deterministic) values.set("run.workers", "1");
    cfg = RunConfig::from(values);
    meta = {cfg.config_hash, cfg.seed, version()};
    spdlog::info("config_hash={} seed={} version={}", cfg.config_hash, cfg.seed, meta.version);

    if (cfg.codec_kind == "toy") {
      ToyCodecConfig toy;
      toy.dimension = cfg.dimension;
      base_ = std::make_unique<ToyCodec>(toy);
    } else {
      base_ = std::make_unique<SocketCodec>(cfg.socket_host, cfg.socket_port, cfg.dimension, default_languages());
    }
    const SentinelTable table = load_sentinel_table(
        cfg.sentinel_table.empty() ? fs::path(CLM_DATA_DIR) / "sentinels.tsv" : fs::path(cfg.sentinel_table));
    sentinels_ = std::make_unique<SentinelSet>(*base_, table);
  }

  // Serves embeddings from a build-data directory's cache when present.
  void attach_cache(const fs::path& data_dir) {
    const fs::path path = data_dir / kCacheFile;
    if (!fs::exists(path)) return;
    cache_ = std::make_unique<EmbeddingCache>(EmbeddingCache::load(path));
    if (cache_->dimension() != cfg.dimension) {
      fail(ErrorCode::kInvalidConfig, "codec.dimension " + std::to_string(cfg.dimension) + " does not match cache " +
                                          path.string());
    }
    cached_ = std::make_unique<CachedCodec>(*base_, *cache_);
  }

  const ConceptCodec& codec() const { return cached_ ? static_cast<const ConceptCodec&>(*cached_) : *base_; }
  const SentinelSet& sentinels() const { return *sentinels_; }
  Segmenter segmenter() const { return {scorer_, cfg.segmentation}; }

  void write_sidecar(const fs::path& artifact) const {
    const json j{{"artifact", artifact.filename().string()},
                 {"command", command_},
                 {"config_hash", meta.config_hash},
                 {"seed", meta.seed},
                 {"version", meta.version}};
    binio::write_atomically(artifact.string() + ".meta.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  }

  RunConfig cfg;
  ReportMeta meta;

 private:
  std::string command_;
  std::unique_ptr<ConceptCodec> base_;
  std::unique_ptr<EmbeddingCache> cache_;
  std::unique_ptr<CachedCodec> cached_;
  std::unique_ptr<SentinelSet> sentinels_;
  RuleBoundaryScorer scorer_;
};

ChineseScriptClassifier script_classifier() { return ChineseScriptClassifier::load_bundled(CLM_DATA_DIR); }

std::unique_ptr<TwoTowerModel<float>> load_model(const Context& ctx, const fs::path& checkpoint) {
  auto model = std::make_unique<TwoTowerModel<float>>(ctx.cfg.model, ctx.cfg.seed);
  nn::load_parameters(checkpoint, model->parameters());
  return model;
}

Normalizer load_normalizer(const fs::path& data_dir) {
  const fs::path path = data_dir / kNormalizerFile;
  require_path("--data (normalizer; run fit-normalizer first)", path);
  return Normalizer::load(path);
}

PretrainCorpus load_pretrain_corpus(const Context& ctx, const fs::path& data_dir) {
  const auto docs = read_segmented(data_dir / kSegmentedFile);
  auto corpus = build_pretrain_corpus(docs, ctx.codec(), ctx.sentinels(), ctx.cfg.model.max_positions,
                                      ctx.cfg.workers, ctx.cfg.eot_language);
  for (const auto& id : corpus.skipped) spdlog::warn("document '{}' has no sentences, skipped", id);
  return corpus;
}

// ---- segment --------------------------------------------------------------

int cmd_segment(Context& ctx, const fs::path& input, const fs::path& out) {
  const auto docs = read_documents(input);
  const auto classifier = script_classifier();
  const Segmenter segmenter = ctx.segmenter();
  std::vector<SegmentedDocument> result(docs.size());
  parallel_for(docs.size(), ctx.cfg.workers, [&](std::size_t i) {
    const auto& d = docs[i];
    result[i] = {d.id, classifier.resolve_language(d.lang, d.text), segmenter(d.text)};
  });
  std::size_t sentences = 0;
  for (const auto& d : result) sentences += d.sentences.size();
  write_segmented(out, result);
  ctx.write_sidecar(out);
  spdlog::info("segmented {} documents into {} sentences", result.size(), sentences);
  return kExitOk;
}

// ---- build-data -----------------------------------------------------------

int cmd_build_data(Context& ctx, const fs::path& input, const std::string& conversations, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto classifier = script_classifier();
  const Segmenter segmenter = ctx.segmenter();
  const ConceptCodec& codec = ctx.codec();

  std::vector<SegmentedDocument> docs;
  std::size_t skipped = 0;
  for (auto& d : read_segmented(input)) {
    if (d.sentences.empty()) {
      spdlog::warn("document '{}' has no sentences, skipped", d.id);
      ++skipped;
      continue;
    }
    docs.push_back(std::move(d));
  }

  std::vector<std::pair<std::string, std::string>> pairs;  // (text, lang)
  std::set<std::string> languages;
  json by_lang = json::object();
  std::size_t sentence_count = 0;
  for (const auto& d : docs) {
    languages.insert(d.lang);
    if (!by_lang.contains(d.lang)) by_lang[d.lang] = {{"documents", 0}, {"sentences", 0}};
    auto& row = by_lang[d.lang];
    row["documents"] = row["documents"].get<std::size_t>() + 1;
    row["sentences"] = row["sentences"].get<std::size_t>() + d.sentences.size();
    sentence_count += d.sentences.size();
    for (const auto& s : d.sentences) pairs.emplace_back(s, d.lang);
  }

  std::vector<Conversation> convs;
  std::size_t instances = 0;
  if (!conversations.empty()) {
    convs = read_conversations(conversations);
    for (auto& c : convs) {
      std::string all_text;
      for (const auto& t : c.turns) all_text += t.text;
      c.lang = classifier.resolve_language(c.lang, all_text);
      languages.insert(c.lang);
      for (const auto& inst : expand_conversation(c, segmenter, codec, ctx.sentinels())) {
        ++instances;
        (void)inst;
      }
      for (const auto& t : c.turns) {
        for (const auto& s : segmenter(t.text)) pairs.emplace_back(s, c.lang);
      }
    }
  }
  for (const auto& lang : languages) {
    for (auto kind : {SentinelKind::kUserTurn, SentinelKind::kAssistantTurn, SentinelKind::kEndOfText}) {
      const Sentinel& s = ctx.sentinels().get(kind, lang);
      pairs.emplace_back(s.text, s.lang);
    }
  }

  const CodecVocabulary vocab = CodecVocabulary::build(codec, pairs);
  EmbeddingCache cache(codec.dimension());
  for (const auto& e : vocab.entries()) cache.insert(e.text, e.lang, e.embedding);

  write_segmented(out_dir / kSegmentedFile, docs);
  ctx.write_sidecar(out_dir / kSegmentedFile);
  if (!conversations.empty()) {
    write_conversations(out_dir / kConversationsFile, convs);
    ctx.write_sidecar(out_dir / kConversationsFile);
  }
  vocab.save_tsv(out_dir / kVocabFile);
  ctx.write_sidecar(out_dir / kVocabFile);
  cache.save(out_dir / kCacheFile);
  ctx.write_sidecar(out_dir / kCacheFile);

  const json stats{{"documents", docs.size()},
                   {"skipped_empty_documents", skipped},
                   {"sentences", sentence_count},
                   {"by_language", by_lang},
                   {"conversations", convs.size()},
                   {"instruction_instances", instances},
                   {"vocabulary_entries", vocab.size()},
                   {"meta", {{"config_hash", ctx.meta.config_hash}, {"seed", ctx.meta.seed}, {"version", ctx.meta.version}}}};
  binio::write_atomically(out_dir / kStatsFile, [&](std::ostream& o) { o << stats.dump(2) << '\n'; });
  spdlog::info("built data: {} documents, {} sentences, {} instances, {} vocabulary entries", docs.size(),
               sentence_count, instances, vocab.size());
  return kExitOk;
}

// ---- fit-normalizer -------------------------------------------------------

int cmd_fit_normalizer(Context& ctx, const fs::path& data_dir, const std::string& out_arg) {
  ctx.attach_cache(data_dir);
  const auto corpus = load_pretrain_corpus(ctx, data_dir);
  ReservoirSampler reservoir(ctx.cfg.normalizer_sample_cap, ctx.cfg.seed);
  for (const auto& seq : corpus.sequences) {
    for (const auto& e : seq.embeddings) reservoir.offer(e);
  }
  const Normalizer normalizer = Normalizer::fit(reservoir.sample(), ctx.cfg.zero_iqr_fallback);
  const fs::path out = out_arg.empty() ? data_dir / kNormalizerFile : fs::path(out_arg);
  normalizer.save(out);
  ctx.write_sidecar(out);
  spdlog::info("fitted normalizer on {} of {} embeddings", reservoir.sample().size(), reservoir.seen());
  return kExitOk;
}

// ---- pretrain / finetune --------------------------------------------------

RunOptions run_options(const Context& ctx, bool resume, std::optional<std::size_t> stop_after, std::size_t steps) {
  RunOptions o;
  o.config_hash = ctx.cfg.config_hash;
  o.version = ctx.meta.version;
  o.resume = resume;
  o.stop_after = stop_after;
  o.interrupt = &g_interrupted;
  const std::size_t every = std::max<std::size_t>(1, steps / 10);
  o.on_step = [every](std::size_t step, double lr, double loss) {
    if (step % every == 0 || step == 1) spdlog::info("step {} lr {:.6g} loss {:.6f}", step, lr, loss);
  };
  return o;
}

int report_run(std::ostream& out, const RunResult& r) {
  out << json{{"first_step", r.first_step},
              {"last_step", r.last_step},
              {"interrupted", r.interrupted},
              {"final_loss", r.losses.empty() ? 0.0 : r.losses.back()},
              {"checkpoint", r.checkpoint.string()}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_pretrain(Context& ctx, const fs::path& data_dir, const fs::path& out_dir, bool resume,
                 std::optional<std::size_t> stop_after, std::ostream& out) {
  ctx.attach_cache(data_dir);
  const Normalizer normalizer = load_normalizer(data_dir);
  const auto corpus = load_pretrain_corpus(ctx, data_dir);
  std::vector<TrainingExample> examples;
  for (const auto& seq : corpus.sequences) examples.push_back(normalize_example(to_training_example(seq), normalizer));

  TwoTowerModel<float> model(ctx.cfg.model, ctx.cfg.seed);
  spdlog::info("model parameters: {}", model.parameter_count());
  const NoiseSchedule schedule(ctx.cfg.model.t_train, ctx.cfg.schedule_offset);
  const auto result = run_training(model, schedule, examples, ctx.cfg.pretrain, out_dir,
                                   run_options(ctx, resume, stop_after, ctx.cfg.pretrain.steps));
  return report_run(out, result);
}

int cmd_finetune(Context& ctx, const fs::path& data_dir, const fs::path& init, const fs::path& out_dir, bool resume,
                 std::optional<std::size_t> stop_after, std::ostream& out) {
  ctx.attach_cache(data_dir);
  require_path("--data (conversations; pass --conversations to build-data)", data_dir / kConversationsFile);
  const Normalizer normalizer = load_normalizer(data_dir);
  std::vector<TrainingExample> examples;
  for (const auto& conv : read_conversations(data_dir / kConversationsFile)) {
    for (const auto& inst : expand_conversation(conv, ctx.segmenter(), ctx.codec(), ctx.sentinels())) {
      try {
        const auto fitted = truncate_context(inst, ctx.cfg.model.max_positions);
        examples.push_back(normalize_example(to_training_example(fitted), normalizer));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kContextOverflow) throw;
        spdlog::warn("{}", e.what());
      }
    }
  }
  auto model = load_model(ctx, init);
  const NoiseSchedule schedule(ctx.cfg.model.t_train, ctx.cfg.schedule_offset);
  const auto result = run_training(*model, schedule, examples, ctx.cfg.finetune, out_dir,
                                   run_options(ctx, resume, stop_after, ctx.cfg.finetune.steps));
  return report_run(out, result);
}

// ---- generate -------------------------------------------------------------

int cmd_generate(Context& ctx, const fs::path& data_dir, const fs::path& checkpoint, const fs::path& prompt_path,
                 std::optional<std::size_t> max_sentences, std::ostream& out) {
  ctx.attach_cache(data_dir);
  std::ifstream in(prompt_path);
  const json prompt = json::parse(in, nullptr, false);
  if (prompt.is_discarded() || !prompt.contains("lang")) {
    fail(ErrorCode::kFormatError, prompt_path.string() + ": expected {lang, sentences} or {lang, turns}");
  }
  const std::string lang = prompt.at("lang").get<std::string>();

  std::vector<Embedding> raw_context;
  if (prompt.contains("turns")) {
    Conversation conv{"prompt", lang, {}, ""};
    for (const auto& t : prompt.at("turns")) conv.turns.push_back({t.at("role"), t.at("text")});
    conv.turns.push_back({"assistant", ""});  // the turn to be generated
    raw_context = expand_conversation(conv, ctx.segmenter(), ctx.codec(), ctx.sentinels()).back().context;
  } else if (prompt.contains("sentences")) {
    for (const auto& s : prompt.at("sentences")) raw_context.push_back(ctx.codec().encode(s.get<std::string>(), lang));
  } else {
    fail(ErrorCode::kFormatError, prompt_path.string() + ": prompt needs 'sentences' or 'turns'");
  }

  const Normalizer normalizer = load_normalizer(data_dir);
  const CodecVocabulary vocab = CodecVocabulary::load_tsv(data_dir / kVocabFile, ctx.codec());
  const auto model = load_model(ctx, checkpoint);
  const NoiseSchedule schedule(ctx.cfg.model.t_train, ctx.cfg.schedule_offset);
  const DiffusionPredictor predictor(*model, schedule, ctx.cfg.sampler);

  GenerationConfig gen;
  gen.max_sentences = max_sentences.value_or(ctx.cfg.instruct_max_sentences);
  gen.eot_threshold = ctx.cfg.eot_threshold;
  gen.target_lang = lang;
  gen.seed = ctx.cfg.seed;
  gen.reencode = ctx.cfg.reencode;
  const std::size_t room = ctx.cfg.model.max_positions > gen.max_sentences
                               ? ctx.cfg.model.max_positions - gen.max_sentences
                               : 0;
  std::vector<Embedding> context;
  const std::size_t begin = raw_context.size() > room ? raw_context.size() - room : 0;
  if (begin > 0) spdlog::warn("prompt truncated to its last {} sentences", room);
  for (std::size_t i = begin; i < raw_context.size(); ++i) context.push_back(normalizer.apply(raw_context[i]));

  const auto result = generate(context, predictor, normalizer, ctx.codec(), vocab, ctx.sentinels(), gen);
  for (const auto& s : result.sentences) out << s << '\n';
  out << json{{"stop_reason", stop_reason_name(result.stop_reason)},
              {"n_sentences", result.sentences.size()},
              {"seed", gen.seed},
              {"config_hash", ctx.meta.config_hash}}
             .dump()
      << '\n';
  return kExitOk;
}

// ---- evaluation -----------------------------------------------------------

int cmd_eval_pretrain(Context& ctx, const fs::path& data_dir, const fs::path& checkpoint, const fs::path& input,
                      const fs::path& out_dir) {
  ctx.attach_cache(data_dir);
  const Normalizer normalizer = load_normalizer(data_dir);
  const CodecVocabulary vocab = CodecVocabulary::load_tsv(data_dir / kVocabFile, ctx.codec());
  const auto model = load_model(ctx, checkpoint);
  const NoiseSchedule schedule(ctx.cfg.model.t_train, ctx.cfg.schedule_offset);
  const DiffusionPredictor predictor(*model, schedule, ctx.cfg.sampler);
  const auto result =
      prefix_eval(read_segmented(input), predictor, normalizer, ctx.codec(), vocab, ctx.cfg.prefix_eval);
  emit_report(result.records, out_dir, ctx.meta);
  spdlog::info("prefix evaluation: {} documents, {} records", result.selected.size(), result.records.size());
  return kExitOk;
}

int cmd_eval_instruct(Context& ctx, const fs::path& data_dir, const fs::path& checkpoint, const fs::path& input,
                      const fs::path& out_dir) {
  ctx.attach_cache(data_dir);
  const Normalizer normalizer = load_normalizer(data_dir);
  const CodecVocabulary vocab = CodecVocabulary::load_tsv(data_dir / kVocabFile, ctx.codec());
  const auto model = load_model(ctx, checkpoint);
  const NoiseSchedule schedule(ctx.cfg.model.t_train, ctx.cfg.schedule_offset);
  const DiffusionPredictor predictor(*model, schedule, ctx.cfg.sampler);
  const InstructEvalConfig ic{ctx.cfg.instruct_max_sentences, ctx.cfg.eot_threshold, ctx.cfg.seed};
  const auto records = instruct_eval(read_conversations(input), ctx.segmenter(), predictor, normalizer, ctx.codec(),
                                     vocab, ctx.sentinels(), ic);
  emit_report(records, out_dir, ctx.meta);
  spdlog::info("instruction evaluation: {} records", records.size());
  return kExitOk;
}

int cmd_align(Context& ctx, const fs::path& input, const std::vector<std::string>& languages,
              const fs::path& out_dir) {
  const auto records = alignment_pilot(read_parallel_pairs(input), ctx.codec(), ctx.cfg.align_per_lang_cap, languages);
  emit_report(records, out_dir, ctx.meta);
  for (const auto& a : aggregate(records)) {
    if (a.lang != "all") spdlog::info("{} mean cosine {:.4f} over {} pairs", a.lang, a.mean, a.count);
  }
  return kExitOk;
}

int cmd_report(Context& ctx, const fs::path& input, const fs::path& out_dir) {
  std::ifstream in(input);
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.contains("records")) fail(ErrorCode::kFormatError, input.string() + ": no records");
  std::vector<EvalRecord> records;
  for (const auto& r : j.at("records")) {
    records.push_back({r.at("doc_id"), r.at("lang"), r.at("prefix_len"), parse_metric(r.at("metric").get<std::string>()),
                       r.at("value")});
  }
  emit_report(records, out_dir, ctx.meta);
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config, "INI config file");
  cmd->add_option("--set", opts.overrides, "override a key, section.key=value (repeatable)");
  cmd->add_flag("--deterministic", opts.deterministic, "force single-worker execution");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // Log to `err` for the duration of this call only.
  struct LoggerScope {
    std::shared_ptr<spdlog::logger> previous = spdlog::default_logger();
    explicit LoggerScope(std::ostream& err) {
      auto logger = std::make_shared<spdlog::logger>("clm", std::make_shared<spdlog::sinks::ostream_sink_mt>(err));
      logger->set_pattern("[%l] %v");
      spdlog::set_default_logger(logger);
    }
    ~LoggerScope() { spdlog::set_default_logger(previous); }
  } logger_scope(err);

  CLI::App app{"Concept-level language model toolkit"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  CommonOptions common;
  std::string input, output, data, checkpoint, init, conversations, prompt;
  std::vector<std::string> languages;
  bool resume = false;
  std::optional<std::size_t> stop_after, max_sentences;

  auto* seg = app.add_subcommand("segment", "split documents into sentences");
  add_common(seg, common);
  seg->add_option("--input", input, "documents JSONL {id, lang, text}")->required();
  seg->add_option("--out", output, "segmented JSONL to write")->required();

  auto* build = app.add_subcommand("build-data", "prepare a training data directory");
  add_common(build, common);
  build->add_option("--input", input, "segmented JSONL")->required();
  build->add_option("--conversations", conversations, "conversations JSONL for instruction tuning");
  build->add_option("--out", output, "output directory")->required();

  auto* fitn = app.add_subcommand("fit-normalizer", "fit the embedding normalizer");
  add_common(fitn, common);
  fitn->add_option("--data", data, "build-data directory")->required();
  fitn->add_option("--out", output, "normalizer file (default <data>/normalizer.clmn)");

  auto* pre = app.add_subcommand("pretrain", "pre-train a model");
  add_common(pre, common);
  pre->add_option("--data", data, "build-data directory")->required();
  pre->add_option("--out", output, "run directory")->required();
  pre->add_flag("--resume", resume, "continue from the newest checkpoint in --out");
  pre->add_option("--stop-after", stop_after, "checkpoint and stop after this step");

  auto* fine = app.add_subcommand("finetune", "instruction-tune a model");
  add_common(fine, common);
  fine->add_option("--data", data, "build-data directory with conversations")->required();
  fine->add_option("--init", init, "pre-trained weights (.clmw)")->required();
  fine->add_option("--out", output, "run directory")->required();
  fine->add_flag("--resume", resume, "continue from the newest checkpoint in --out");
  fine->add_option("--stop-after", stop_after, "checkpoint and stop after this step");

  auto* gen = app.add_subcommand("generate", "generate sentences from a prompt");
  add_common(gen, common);
  gen->add_option("--data", data, "build-data directory")->required();
  gen->add_option("--checkpoint", checkpoint, "model weights (.clmw)")->required();
  gen->add_option("--prompt", prompt, "prompt JSON {lang, sentences} or {lang, turns}")->required();
  gen->add_option("--max-sentences", max_sentences, "generation cap");

  auto* evp = app.add_subcommand("eval-pretrain", "prefix-growing L2 and round-trip L2 evaluation");
  add_common(evp, common);
  evp->add_option("--data", data, "build-data directory")->required();
  evp->add_option("--checkpoint", checkpoint, "model weights (.clmw)")->required();
  evp->add_option("--input", input, "segmented JSONL to evaluate")->required();
  evp->add_option("--out", output, "report directory")->required();

  auto* evi = app.add_subcommand("eval-instruct", "ROUGE-L evaluation of generated responses");
  add_common(evi, common);
  evi->add_option("--data", data, "build-data directory")->required();
  evi->add_option("--checkpoint", checkpoint, "model weights (.clmw)")->required();
  evi->add_option("--input", input, "conversations JSONL")->required();
  evi->add_option("--out", output, "report directory")->required();

  auto* align = app.add_subcommand("align", "cross-lingual cosine alignment pilot");
  add_common(align, common);
  align->add_option("--input", input, "parallel JSONL {eng, text, lang}")->required();
  align->add_option("--languages", languages, "languages expected in the input")->delimiter(',');
  align->add_option("--out", output, "report directory")->required();

  auto* rep = app.add_subcommand("report", "re-emit report files from a report.json");
  add_common(rep, common);
  rep->add_option("--input", input, "report.json")->required();
  rep->add_option("--out", output, "report directory")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  g_interrupted.store(false);
  auto previous = std::signal(SIGINT, on_sigint);
  int code = kExitOk;
  try {
    CLI::App* cmd = app.get_subcommands().front();
    const std::string name = cmd->get_name();
    for (const auto& [flag, value] : std::vector<std::pair<std::string, std::string>>{
             {"--input", input}, {"--data", data}, {"--checkpoint", checkpoint}, {"--init", init},
             {"--conversations", conversations}, {"--prompt", prompt}}) {
      if (!value.empty()) require_path(flag, value);
    }
    Context ctx(common, name);
    if (name == "segment") {
      code = cmd_segment(ctx, input, output);
    } else if (name == "build-data") {
      code = cmd_build_data(ctx, input, conversations, output);
    } else if (name == "fit-normalizer") {
      code = cmd_fit_normalizer(ctx, data, output);
    } else if (name == "pretrain") {
      code = cmd_pretrain(ctx, data, output, resume, stop_after, out);
    } else if (name == "finetune") {
      code = cmd_finetune(ctx, data, init, output, resume, stop_after, out);
    } else if (name == "generate") {
      code = cmd_generate(ctx, data, checkpoint, prompt, max_sentences, out);
    } else if (name == "eval-pretrain") {
      code = cmd_eval_pretrain(ctx, data, checkpoint, input, output);
    } else if (name == "eval-instruct") {
      code = cmd_eval_instruct(ctx, data, checkpoint, input, output);
    } else if (name == "align") {
      code = cmd_align(ctx, input, languages, output);
    } else {
      code = cmd_report(ctx, input, output);
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    code = e.code() == ErrorCode::kInvalidConfig ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    code = kExitRuntime;
  }
  std::signal(SIGINT, previous);
  return code;
}

}  // namespace clm::cli
