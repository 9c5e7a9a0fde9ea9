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

#include "clm/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <limits>

#include "clm/common/error.hpp"
#include "clm/common/hash.hpp"

namespace clm::cli {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"run.seed", "0", "global seed for initialization, training draws and sampling"},
      {"run.workers", "1", "worker threads for per-document ingestion; 1 is fully sequential"},

      {"codec.kind", "toy", "toy (hashed character n-grams) or socket (external encoder)"},
      {"codec.dimension", "64", "embedding dimension; also the model input width"},
      {"codec.socket_host", "127.0.0.1", "host of the external encoder when codec.kind = socket"},
      {"codec.socket_port", "0", "port of the external encoder when codec.kind = socket"},
      {"codec.sentinel_table", "", "TSV of translated turn and end-of-text sentences; empty uses the bundled table"},

      {"segment.threshold", "0.02", "boundary probability cut-off"},
      {"segment.max_len", "256", "maximum sentence length in code points"},

      {"data.eot_language", "document", "end-of-text sentinel language for pre-training: document or english"},
      {"data.normalizer_sample_cap", "100000", "reservoir size for fitting the normalizer"},
      {"data.zero_iqr_fallback", "std", "spread for dimensions with zero IQR: std or none"},

      {"model.d_model", "128", "hidden width of both towers"},
      {"model.n_ctx_layers", "4", "context encoder blocks"},
      {"model.n_den_layers", "4", "denoiser blocks"},
      {"model.n_heads", "4", "attention heads"},
      {"model.max_positions", "128", "maximum context length in sentences"},
      {"model.t_train", "100", "training timesteps"},
      {"model.cfg_drop_prob", "0.15", "probability of dropping the context during training"},
      {"model.init_std", "0.02", "standard deviation of the weight initialization"},

      {"diffusion.cosine_offset", "0.008", "offset of the cosine noise schedule"},

      {"train.pretrain_steps", "250000", "pre-training optimizer steps"},
      {"train.pretrain_lr", "4e-4", "pre-training peak learning rate"},
      {"train.pretrain_warmup", "10000", "pre-training linear warmup steps"},
      {"train.pretrain_weight_decay", "0.1", "pre-training AdamW weight decay"},
      {"train.pretrain_batch_sentences", "229376", "sentence embeddings per pre-training batch"},
      {"train.finetune_steps", "20000", "instruction-tuning optimizer steps"},
      {"train.finetune_lr", "1e-5", "instruction-tuning peak learning rate"},
      {"train.finetune_warmup", "0", "instruction-tuning warmup steps"},
      {"train.finetune_weight_decay", "0.01", "instruction-tuning AdamW weight decay"},
      {"train.finetune_batch_instances", "512", "instances per instruction-tuning batch"},
      {"train.floor_lr", "0", "learning rate at the end of the cosine decay"},
      {"train.beta1", "0.9", "AdamW first-moment decay"},
      {"train.beta2", "0.98", "AdamW second-moment decay"},
      {"train.adam_eps", "1e-8", "AdamW denominator epsilon"},
      {"train.clip_norm", "1.0", "global gradient norm clip; 0 disables"},
      {"train.checkpoint_every", "500", "steps between checkpoints"},

      {"inference.steps", "40", "sampler timesteps"},
      {"inference.sigma_init", "0.6", "scale of the initial gaussian draw"},
      {"inference.guidance_scale", "3.0", "classifier-free guidance scale"},
      {"inference.guidance_rescale", "0.7", "blend factor of the std-rescaled guided prediction"},
      {"inference.epsilon_scaling", "1.00045", "epsilon scaling factor"},
      {"inference.epsilon_mode", "divide", "divide or multiply the predicted epsilon by the scaling factor"},
      {"inference.rescale_mode", "per_vector", "std for guidance rescale: per_vector or per_batch"},
      {"inference.eot_threshold", "0.90", "cosine to the end-of-text embedding that stops generation"},
      {"inference.pretrain_eval_max_sentences", "1", "generation cap for prefix evaluation"},
      {"inference.instruct_max_sentences", "16", "generation cap for instruction evaluation and generate"},
      {"inference.reencode", "false", "continue from the re-encoded decoded sentence instead of the prediction"},

      {"eval.min_sentences", "9", "minimum sentences for a document to enter prefix evaluation"},
      {"eval.n_docs", "1000", "documents taken for prefix evaluation"},
      {"eval.space", "raw", "space of prefix L2: raw or normalized"},
      {"eval.align_per_lang_cap", "1000", "parallel pairs per language for the alignment pilot"},
  };
  return keys;
}

ConfigValues::ConfigValues() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

void ConfigValues::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
  it->second = value;
}

void ConfigValues::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    fail(ErrorCode::kInvalidConfig, "override '" + std::string(assignment) + "' is not of the form section.key=value");
  }
  set(std::string(assignment.substr(0, eq)), std::string(assignment.substr(eq + 1)));
}

void ConfigValues::load_ini(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::kInvalidConfig, "config file not found: " + path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::kInvalidConfig, "cannot parse " + path.string() + ": " + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) fail(ErrorCode::kInvalidConfig, path.string() + ": key '" + section + "' outside a section");
    for (const auto& [key, value] : body) set(section + "." + key, value.get_value<std::string>());
  }
}

const std::string& ConfigValues::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
  return it->second;
}

std::string ConfigValues::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    if (k == "run.workers") continue;  // results do not depend on it
    out += k + "=" + v + "\n";
  }
  return out;
}

std::string ConfigValues::hash() const { return to_hex(fnv1a64(canonical())); }

namespace {

class Reader {
 public:
  explicit Reader(const ConfigValues& v) : v_(v) {}

  const std::string& str(const std::string& key) const { return v_.get(key); }

  double real(const std::string& key) const {
    const std::string& s = str(key);
    try {
      std::size_t used = 0;
      const double d = std::stod(s, &used);
      if (used == s.size() && std::isfinite(d)) return d;
    } catch (const std::exception&) {
    }
    fail(ErrorCode::kInvalidConfig, key + ": '" + s + "' is not a finite number");
  }

  std::uint64_t u64(const std::string& key) const {
    const std::string& s = str(key);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      fail(ErrorCode::kInvalidConfig, key + ": '" + s + "' is not a non-negative integer");
    }
    return out;
  }

  std::size_t size(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }

  bool flag(const std::string& key) const {
    const std::string& s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail(ErrorCode::kInvalidConfig, key + ": '" + s + "' is not a boolean");
  }

  const std::string& choice(const std::string& key, std::initializer_list<std::string_view> options) const {
    const std::string& s = str(key);
    for (auto o : options) {
      if (s == o) return s;
    }
    std::string list;
    for (auto o : options) list += (list.empty() ? "" : ", ") + std::string(o);
    fail(ErrorCode::kInvalidConfig, key + ": '" + s + "' must be one of " + list);
  }

 private:
  const ConfigValues& v_;
};

// Re-raises validation failures with the config key that caused them.
template <typename F>
void validate_as(const std::string& key, F&& check) {
  try {
    check();
  } catch (const Error& e) {
    fail(ErrorCode::kInvalidConfig, key + ": " + e.what());
  }
}

}  // namespace

RunConfig RunConfig::from(const ConfigValues& values) {
  const Reader r(values);
  RunConfig c;
  c.seed = r.u64("run.seed");
  c.workers = r.size("run.workers");
  if (c.workers == 0) fail(ErrorCode::kInvalidConfig, "run.workers must be >= 1");

  c.codec_kind = r.choice("codec.kind", {"toy", "socket"});
  c.dimension = r.size("codec.dimension");
  if (c.dimension == 0) fail(ErrorCode::kInvalidConfig, "codec.dimension must be >= 1");
  c.socket_host = r.str("codec.socket_host");
  const auto port = r.u64("codec.socket_port");
  if (port > 65535) fail(ErrorCode::kInvalidConfig, "codec.socket_port must be <= 65535");
  c.socket_port = static_cast<std::uint16_t>(port);
  if (c.codec_kind == "socket" && c.socket_port == 0) {
    fail(ErrorCode::kInvalidConfig, "codec.socket_port must be set when codec.kind = socket");
  }
  c.sentinel_table = r.str("codec.sentinel_table");
  if (!c.sentinel_table.empty() && !std::filesystem::exists(c.sentinel_table)) {
    fail(ErrorCode::kInvalidConfig, "codec.sentinel_table: path does not exist: " + c.sentinel_table);
  }

  c.segmentation.threshold = r.real("segment.threshold");
  c.segmentation.max_len = r.size("segment.max_len");
  validate_as("segment", [&] { c.segmentation.validate(); });

  c.eot_language = r.choice("data.eot_language", {"document", "english"}) == "document" ? EotLanguage::kDocument
                                                                                      : EotLanguage::kEnglish;
  c.normalizer_sample_cap = r.size("data.normalizer_sample_cap");
  if (c.normalizer_sample_cap < 2) fail(ErrorCode::kInvalidConfig, "data.normalizer_sample_cap must be >= 2");
  c.zero_iqr_fallback =
      r.choice("data.zero_iqr_fallback", {"std", "none"}) == "std" ? ZeroIqrFallback::kStd : ZeroIqrFallback::kNone;

  c.model.d_embedding = c.dimension;
  c.model.d_model = r.size("model.d_model");
  c.model.n_ctx_layers = r.size("model.n_ctx_layers");
  c.model.n_den_layers = r.size("model.n_den_layers");
  c.model.n_heads = r.size("model.n_heads");
  c.model.max_positions = r.size("model.max_positions");
  c.model.t_train = r.size("model.t_train");
  c.model.cfg_drop_prob = r.real("model.cfg_drop_prob");
  c.model.init_std = r.real("model.init_std");
  validate_as("model", [&] { c.model.validate(); });
  c.schedule_offset = r.real("diffusion.cosine_offset");
  validate_as("diffusion.cosine_offset", [&] { NoiseSchedule(c.model.t_train, c.schedule_offset); });

  auto optimizer = [&](TrainConfig& t) {
    t.floor_lr = r.real("train.floor_lr");
    t.beta1 = r.real("train.beta1");
    t.beta2 = r.real("train.beta2");
    t.adam_eps = r.real("train.adam_eps");
    t.clip_norm = r.real("train.clip_norm");
    t.checkpoint_every = r.size("train.checkpoint_every");
    t.seed = c.seed;
  };
  c.pretrain.steps = r.size("train.pretrain_steps");
  c.pretrain.peak_lr = r.real("train.pretrain_lr");
  c.pretrain.warmup = r.size("train.pretrain_warmup");
  c.pretrain.weight_decay = r.real("train.pretrain_weight_decay");
  c.pretrain.sentence_budget = r.size("train.pretrain_batch_sentences");
  optimizer(c.pretrain);
  validate_as("train.pretrain_*", [&] { c.pretrain.validate(); });
  c.finetune.steps = r.size("train.finetune_steps");
  c.finetune.peak_lr = r.real("train.finetune_lr");
  c.finetune.warmup = r.size("train.finetune_warmup");
  c.finetune.weight_decay = r.real("train.finetune_weight_decay");
  c.finetune.instance_budget = r.size("train.finetune_batch_instances");
  optimizer(c.finetune);
  validate_as("train.finetune_*", [&] { c.finetune.validate(); });

  c.sampler.steps = r.size("inference.steps");
  c.sampler.sigma_init = r.real("inference.sigma_init");
  c.sampler.guidance_scale = r.real("inference.guidance_scale");
  c.sampler.guidance_rescale = r.real("inference.guidance_rescale");
  c.sampler.epsilon_scaling = r.real("inference.epsilon_scaling");
  c.sampler.epsilon_mode = r.choice("inference.epsilon_mode", {"divide", "multiply"}) == "divide"
                               ? EpsilonScalingMode::kDivide
                               : EpsilonScalingMode::kMultiply;
  c.sampler.rescale_mode = r.choice("inference.rescale_mode", {"per_vector", "per_batch"}) == "per_vector"
                               ? RescaleStdMode::kPerVector
                               : RescaleStdMode::kPerBatch;
  c.sampler.seed = c.seed;
  validate_as("inference", [&] { c.sampler.validate(); });
  if (c.sampler.steps > c.model.t_train) {
    fail(ErrorCode::kInvalidConfig, "inference.steps must not exceed model.t_train");
  }
  c.eot_threshold = r.real("inference.eot_threshold");
  c.pretrain_eval_max_sentences = r.size("inference.pretrain_eval_max_sentences");
  c.instruct_max_sentences = r.size("inference.instruct_max_sentences");
  c.reencode = r.flag("inference.reencode");
  for (const auto& [key, n] : {std::pair<std::string, std::size_t>{"inference.pretrain_eval_max_sentences",
                                                                    c.pretrain_eval_max_sentences},
                               {"inference.instruct_max_sentences", c.instruct_max_sentences}}) {
    validate_as(key, [&] { GenerationConfig{n, c.eot_threshold}.validate(); });
    if (n >= c.model.max_positions) fail(ErrorCode::kInvalidConfig, key + " must be below model.max_positions");
  }

  c.prefix_eval.min_sentences = r.size("eval.min_sentences");
  c.prefix_eval.n_docs = r.size("eval.n_docs");
  c.prefix_eval.normalized_space = r.choice("eval.space", {"raw", "normalized"}) == "normalized";
  c.prefix_eval.seed = c.seed;
  c.prefix_eval.max_sentences = c.pretrain_eval_max_sentences;
  if (c.prefix_eval.max_sentences != 1) {
    fail(ErrorCode::kInvalidConfig, "inference.pretrain_eval_max_sentences must be 1: each prefix is scored on one sentence");
  }
  if (c.prefix_eval.min_sentences < 2) fail(ErrorCode::kInvalidConfig, "eval.min_sentences must be >= 2");
  if (c.prefix_eval.n_docs == 0) fail(ErrorCode::kInvalidConfig, "eval.n_docs must be >= 1");
  c.align_per_lang_cap = r.size("eval.align_per_lang_cap");
  if (c.align_per_lang_cap == 0) fail(ErrorCode::kInvalidConfig, "eval.align_per_lang_cap must be >= 1");

  c.config_hash = values.hash();
  return c;
}

}  // namespace clm::cli
