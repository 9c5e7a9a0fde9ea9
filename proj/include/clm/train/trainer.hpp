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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "clm/data/normalizer.hpp"
#include "clm/data/sequences.hpp"
#include "clm/diffusion/diffusion.hpp"
#include "clm/model/two_tower.hpp"
#include "clm/nn/optim.hpp"

namespace clm {

enum class TrainMode { kPretrain, kFinetune };

struct TrainConfig {
  TrainMode mode = TrainMode::kPretrain;
  std::size_t steps = 250000;
  double peak_lr = 4e-4;
  std::size_t warmup = 10000;
  double floor_lr = 0.0;
  double weight_decay = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-8;
  double clip_norm = 1.0;  // <= 0 disables clipping
  std::size_t sentence_budget = 229376;  // pretrain: sentence embeddings per batch
  std::size_t instance_budget = 512;     // finetune: instances per batch
  std::size_t checkpoint_every = 500;
  std::uint64_t seed = 0;

  static TrainConfig pretrain_defaults();
  static TrainConfig finetune_defaults();

  void validate() const;
  nn::LrSchedule lr_schedule() const;
  nn::AdamWConfig adamw() const;
};

// Random draws for one training example at one step, taken from the stream
// keyed by (seed, example id, step): first the context-drop decision, then
// for each target position in order a timestep and d gaussian values.
struct InstanceDraws {
  bool dropped = false;
  std::vector<std::size_t> timesteps;
  std::vector<std::vector<float>> noise;
};

InstanceDraws draw_instance(std::uint64_t seed, const std::string& id, std::uint64_t step, std::size_t targets,
                            std::size_t dimension, std::size_t t_train, double cfg_drop_prob);

// Applies the normalizer to every embedding.
TrainingExample normalize_example(const TrainingExample& ex, const Normalizer& normalizer);

// Loss contribution of one normalized example:
//   mse(denoise(q_sample(target_j, t_j, noise_j), t_j, context[0..j)), target_j)
// over its target positions, scaled by (targets / total_targets) so that
// the contributions of a batch sum to the mean over all predicted positions.
template <typename T>
nn::Tensor<T> example_loss(const ConceptDenoiser<T>& model, const NoiseSchedule& schedule,
                           const TrainingExample& ex, const InstanceDraws& draws, std::size_t total_targets);

// Sum of example_loss over the batch, evaluated in id order. With
// `accumulate_grads` each example's loss is backpropagated into the
// parameter gradients (which are not reset here). Throws
// NoPredictablePositions when the batch has no target positions.
template <typename T>
double batch_loss(const ConceptDenoiser<T>& model, const NoiseSchedule& schedule,
                  const std::vector<const TrainingExample*>& batch, std::uint64_t seed, std::uint64_t step,
                  bool accumulate_grads);

// One optimizer step (1-based `step`): zero grads, batch_loss with
// backward, clip, AdamW at lr_at(step). Returns the loss.
template <typename T>
double train_step(ConceptDenoiser<T>& model, nn::AdamW<T>& optimizer, const NoiseSchedule& schedule,
                  const std::vector<const TrainingExample*>& batch, const TrainConfig& config, std::uint64_t step);

struct RunOptions {
  std::string config_hash;  // recorded in checkpoints, checked on resume
  std::string version;
  bool resume = false;
  std::optional<std::size_t> stop_after;            // checkpoint and return after this step
  const std::atomic<bool>* interrupt = nullptr;     // checked after every step
  std::function<void(std::size_t step, double lr, double loss)> on_step;
};

struct RunResult {
  std::size_t first_step = 1;  // first step executed by this call
  std::size_t last_step = 0;
  bool interrupted = false;
  std::filesystem::path checkpoint;  // the last checkpoint written
  std::vector<double> losses;        // per executed step
};

// Runs `config.steps` optimizer steps over normalized examples, cycling
// through the batch plan: step s uses batch (s - 1) mod batches. Writes
// step_NNNNNN.{clmw,opt,meta.json} every checkpoint_every steps,
// final.{clmw,opt,meta.json} at the end, and appends {step, lr, loss,
// wall_ms} lines to metrics.jsonl. With resume, continues from the newest
// checkpoint in out_dir after checking its config hash.
RunResult run_training(ConceptDenoiser<float>& model, const NoiseSchedule& schedule,
                       const std::vector<TrainingExample>& examples, const TrainConfig& config,
                       const std::filesystem::path& out_dir, const RunOptions& options);

// Newest step checkpoint in `dir` (by step number), if any.
struct CheckpointRef {
  std::size_t step = 0;
  std::filesystem::path weights;
  std::filesystem::path optimizer;
  std::filesystem::path meta;
};
std::optional<CheckpointRef> latest_checkpoint(const std::filesystem::path& dir);

}  // namespace clm
