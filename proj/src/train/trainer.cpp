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

#include "clm/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <regex>

#include "clm/common/binary_io.hpp"
#include "clm/common/error.hpp"
#include "clm/common/rng.hpp"
#include "clm/data/batching.hpp"
#include "clm/nn/ops.hpp"

namespace clm {

using nlohmann::json;
using nn::Tensor;

namespace {

// Target positions a trainer can use; position 0 has no context.
std::size_t predictable_targets(const TrainingExample& ex) {
  std::size_t n = 0;
  for (std::size_t j = 1; j < ex.loss_mask.size(); ++j) n += ex.loss_mask[j] ? 1 : 0;
  return n;
}

}  // namespace

TrainConfig TrainConfig::pretrain_defaults() { return TrainConfig{}; }

TrainConfig TrainConfig::finetune_defaults() {
  TrainConfig c;
  c.mode = TrainMode::kFinetune;
  c.steps = 20000;
  c.peak_lr = 1e-5;
  c.warmup = 0;
  c.weight_decay = 0.01;
  return c;
}

void TrainConfig::validate() const {
  if (steps == 0) fail(ErrorCode::kInvalidConfig, "train.steps must be >= 1");
  if (sentence_budget == 0 || instance_budget == 0) fail(ErrorCode::kInvalidConfig, "batch budgets must be >= 1");
  if (checkpoint_every == 0) fail(ErrorCode::kInvalidConfig, "train.checkpoint_every must be >= 1");
  lr_schedule().validate();
  adamw().validate();
}

nn::LrSchedule TrainConfig::lr_schedule() const { return {peak_lr, warmup, steps, floor_lr}; }

nn::AdamWConfig TrainConfig::adamw() const { return {beta1, beta2, adam_eps, weight_decay}; }

InstanceDraws draw_instance(std::uint64_t seed, const std::string& id, std::uint64_t step, std::size_t targets,
                            std::size_t dimension, std::size_t t_train, double cfg_drop_prob) {
  Rng rng = Rng::keyed(seed, id, step);
  InstanceDraws d;
  d.dropped = rng.uniform() < cfg_drop_prob;
  d.timesteps.resize(targets);
  d.noise.resize(targets);
  for (std::size_t j = 0; j < targets; ++j) {
    d.timesteps[j] = static_cast<std::size_t>(rng.uniform_int(t_train));
    d.noise[j].resize(dimension);
    for (float& v : d.noise[j]) v = static_cast<float>(rng.normal());
  }
  return d;
}

TrainingExample normalize_example(const TrainingExample& ex, const Normalizer& normalizer) {
  TrainingExample out{ex.id, {}, ex.loss_mask};
  out.embeddings.reserve(ex.embeddings.size());
  for (const auto& e : ex.embeddings) out.embeddings.push_back(normalizer.apply(e));
  return out;
}

template <typename T>
Tensor<T> example_loss(const ConceptDenoiser<T>& model, const NoiseSchedule& schedule, const TrainingExample& ex,
                       const InstanceDraws& draws, std::size_t total_targets) {
  const std::size_t d = model.config().d_embedding;
  std::vector<std::size_t> positions;
  for (std::size_t j = 1; j < ex.loss_mask.size(); ++j) {
    if (ex.loss_mask[j]) positions.push_back(j);
  }
  if (positions.empty()) fail(ErrorCode::kNoPredictablePositions, "example '" + ex.id + "' has no targets");
  if (draws.timesteps.size() != positions.size()) fail(ErrorCode::kShapeError, "draws do not match targets");

  std::vector<T> noised, clean;
  std::vector<DenoiseRow> rows;
  for (std::size_t r = 0; r < positions.size(); ++r) {
    const Embedding& target = ex.embeddings[positions[r]];
    if (target.dimension() != d) fail(ErrorCode::kDimensionMismatch, "example '" + ex.id + "' has wrong dimension");
    const auto x_t = q_sample(schedule, target.values(), draws.timesteps[r], draws.noise[r]);
    noised.insert(noised.end(), x_t.begin(), x_t.end());
    clean.insert(clean.end(), target.values().begin(), target.values().end());
    rows.push_back({draws.timesteps[r], positions[r], !draws.dropped});
  }

  Tensor<T> context;
  if (!draws.dropped) {
    const std::size_t ctx_len = positions.back();
    std::vector<T> ctx;
    ctx.reserve(ctx_len * d);
    for (std::size_t j = 0; j < ctx_len; ++j) {
      ctx.insert(ctx.end(), ex.embeddings[j].values().begin(), ex.embeddings[j].values().end());
    }
    context = model.encode_context(Tensor<T>::from({ctx_len, d}, std::move(ctx)));
  }
  const Tensor<T> pred = model.denoise(Tensor<T>::from({rows.size(), d}, std::move(noised)), rows, context);
  const Tensor<T> loss = nn::mse(pred, Tensor<T>::from({rows.size(), d}, std::move(clean)));
  return nn::scale(loss, static_cast<T>(static_cast<double>(rows.size()) / static_cast<double>(total_targets)));
}

template <typename T>
double batch_loss(const ConceptDenoiser<T>& model, const NoiseSchedule& schedule,
                  const std::vector<const TrainingExample*>& batch, std::uint64_t seed, std::uint64_t step,
                  bool accumulate_grads) {
  std::vector<const TrainingExample*> ordered = batch;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const TrainingExample* a, const TrainingExample* b) { return a->id < b->id; });
  std::size_t total = 0;
  for (const auto* ex : ordered) total += predictable_targets(*ex);
  if (total == 0) fail(ErrorCode::kNoPredictablePositions, "batch has no predictable positions");

  const ModelConfig& cfg = model.config();
  double loss = 0.0;
  for (const auto* ex : ordered) {
    const std::size_t targets = predictable_targets(*ex);
    if (targets == 0) continue;
    const InstanceDraws draws =
        draw_instance(seed, ex->id, step, targets, cfg.d_embedding, cfg.t_train, cfg.cfg_drop_prob);
    if (accumulate_grads) {
      const Tensor<T> l = example_loss(model, schedule, *ex, draws, total);
      l.backward();
      loss += static_cast<double>(l.item());
    } else {
      nn::NoGradGuard guard;
      loss += static_cast<double>(example_loss(model, schedule, *ex, draws, total).item());
    }
  }
  return loss;
}

template <typename T>
double train_step(ConceptDenoiser<T>& model, nn::AdamW<T>& optimizer, const NoiseSchedule& schedule,
                  const std::vector<const TrainingExample*>& batch, const TrainConfig& config, std::uint64_t step) {
  auto& params = model.parameters();
  params.zero_grad();
  const double loss = batch_loss(model, schedule, batch, config.seed, step, true);
  if (!std::isfinite(loss)) fail(ErrorCode::kNumericalError, "non-finite loss at step " + std::to_string(step));
  nn::clip_grad_norm(params, config.clip_norm);
  optimizer.step(config.lr_schedule().lr_at(step));
  return loss;
}

template Tensor<float> example_loss(const ConceptDenoiser<float>&, const NoiseSchedule&, const TrainingExample&,
                                    const InstanceDraws&, std::size_t);
template Tensor<double> example_loss(const ConceptDenoiser<double>&, const NoiseSchedule&, const TrainingExample&,
                                     const InstanceDraws&, std::size_t);
template double batch_loss(const ConceptDenoiser<float>&, const NoiseSchedule&,
                           const std::vector<const TrainingExample*>&, std::uint64_t, std::uint64_t, bool);
template double batch_loss(const ConceptDenoiser<double>&, const NoiseSchedule&,
                           const std::vector<const TrainingExample*>&, std::uint64_t, std::uint64_t, bool);
template double train_step(ConceptDenoiser<float>&, nn::AdamW<float>&, const NoiseSchedule&,
                           const std::vector<const TrainingExample*>&, const TrainConfig&, std::uint64_t);
template double train_step(ConceptDenoiser<double>&, nn::AdamW<double>&, const NoiseSchedule&,
                           const std::vector<const TrainingExample*>&, const TrainConfig&, std::uint64_t);

namespace {

std::string step_stem(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step_%06zu", step);
  return buf;
}

CheckpointRef checkpoint_paths(const std::filesystem::path& dir, const std::string& stem, std::size_t step) {
  return {step, dir / (stem + ".clmw"), dir / (stem + ".opt"), dir / (stem + ".meta.json")};
}

void write_checkpoint(const CheckpointRef& ref, const nn::ParameterStore<float>& params,
                      const nn::AdamW<float>& optimizer, const TrainConfig& config, const RunOptions& options,
                      double lr, double loss) {
  nn::save_parameters(ref.weights, params);
  optimizer.save(ref.optimizer);
  const json meta{{"step", ref.step},       {"config_hash", options.config_hash}, {"seed", config.seed},
                  {"version", options.version}, {"lr", lr},                     {"loss", loss}};
  binio::write_atomically(ref.meta, [&](std::ostream& out) { out << meta.dump(2) << '\n'; });
}

// Keeps the metric lines for steps <= last_step and returns them.
std::string truncated_metrics(const std::filesystem::path& path, std::size_t last_step) {
  std::ifstream in(path);
  std::string kept, line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.contains("step")) fail(ErrorCode::kFormatError, path.string() + ": bad metrics line");
    if (row.at("step").get<std::size_t>() <= last_step) kept += line + "\n";
  }
  return kept;
}

}  // namespace

std::optional<CheckpointRef> latest_checkpoint(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) return std::nullopt;
  static const std::regex pattern(R"(step_(\d+)\.meta\.json)");
  std::optional<CheckpointRef> best;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, pattern)) continue;
    const std::size_t step = std::stoull(m[1].str());
    if (!best || step > best->step) best = checkpoint_paths(dir, step_stem(step), step);
  }
  return best;
}

RunResult run_training(ConceptDenoiser<float>& model, const NoiseSchedule& schedule,
                       const std::vector<TrainingExample>& examples, const TrainConfig& config,
                       const std::filesystem::path& out_dir, const RunOptions& options) {
  config.validate();
  if (schedule.t_train() != model.config().t_train) {
    fail(ErrorCode::kInvalidConfig, "noise schedule and model disagree on t_train");
  }
  std::vector<const TrainingExample*> usable;
  for (const auto& ex : examples) {
    if (predictable_targets(ex) > 0) usable.push_back(&ex);
  }
  if (usable.empty()) fail(ErrorCode::kEmptyCorpus, "no training example has a predictable position");

  BatchPlan plan;
  if (config.mode == TrainMode::kPretrain) {
    std::vector<std::size_t> sizes;
    for (const auto* ex : usable) sizes.push_back(ex->embeddings.size());
    plan = batch_by_budget(sizes, config.sentence_budget);
  } else {
    plan = batch_by_count(usable.size(), config.instance_budget);
  }
  std::vector<std::vector<const TrainingExample*>> batches;
  for (const auto& b : plan) {
    auto& batch = batches.emplace_back();
    for (std::size_t i : b) batch.push_back(usable[i]);
  }

  std::filesystem::create_directories(out_dir);
  const auto metrics_path = out_dir / "metrics.jsonl";
  nn::AdamW<float> optimizer(model.parameters(), config.adamw());
  RunResult result;
  std::size_t start = 1;
  std::string previous_metrics;
  if (options.resume) {
    if (const auto ref = latest_checkpoint(out_dir)) {
      std::ifstream meta_in(ref->meta);
      const json meta = json::parse(meta_in, nullptr, false);
      if (meta.is_discarded()) fail(ErrorCode::kFormatError, ref->meta.string() + ": unreadable checkpoint metadata");
      const std::string hash = meta.value("config_hash", "");
      if (hash != options.config_hash) {
        fail(ErrorCode::kResumeMismatch,
             "checkpoint " + ref->meta.string() + " has config hash " + hash + ", current is " + options.config_hash);
      }
      nn::load_parameters(ref->weights, model.parameters());
      optimizer.load(ref->optimizer);
      start = ref->step + 1;
      result.checkpoint = ref->weights;
      previous_metrics = truncated_metrics(metrics_path, ref->step);
    }
  }
  binio::write_atomically(metrics_path, [&](std::ostream& out) { out << previous_metrics; });
  std::ofstream metrics(metrics_path, std::ios::app);
  if (!metrics) fail(ErrorCode::kIoError, "cannot append to " + metrics_path.string());

  const auto schedule_lr = config.lr_schedule();
  result.first_step = start;
  result.last_step = start - 1;
  double lr = 0.0, loss = 0.0;
  for (std::size_t step = start; step <= config.steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& batch = batches[(step - 1) % batches.size()];
    lr = schedule_lr.lr_at(step);
    loss = train_step(model, optimizer, schedule, batch, config, step);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    metrics << json{{"step", step}, {"lr", lr}, {"loss", loss}, {"wall_ms", wall_ms}}.dump() << '\n';
    metrics.flush();
    result.last_step = step;
    result.losses.push_back(loss);
    if (options.on_step) options.on_step(step, lr, loss);

    const bool stop = (options.stop_after && step == *options.stop_after && step < config.steps) ||
                      (options.interrupt && options.interrupt->load() && step < config.steps);
    if (step % config.checkpoint_every == 0 || step == config.steps || stop) {
      const auto ref = checkpoint_paths(out_dir, step_stem(step), step);
      write_checkpoint(ref, model.parameters(), optimizer, config, options, lr, loss);
      result.checkpoint = ref.weights;
    }
    if (stop) {
      result.interrupted = true;
      return result;
    }
  }
  if (result.last_step < start) {
    // Resumed from the last step: nothing ran, the restored state is final.
    std::ifstream meta_in(latest_checkpoint(out_dir)->meta);
    const json meta = json::parse(meta_in);
    lr = meta.value("lr", 0.0);
    loss = meta.value("loss", 0.0);
  }
  const auto ref = checkpoint_paths(out_dir, "final", config.steps);
  write_checkpoint(ref, model.parameters(), optimizer, config, options, lr, loss);
  result.checkpoint = ref.weights;
  return result;
}

}  // namespace clm
