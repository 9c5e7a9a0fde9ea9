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
#include <json.hpp>

#include "clm/common/error.hpp"
#include "clm/common/rng.hpp"
#include "clm/model/two_tower.hpp"
#include "clm/nn/parameters.hpp"
#include "clm/train/trainer.hpp"
#include "test_helpers.hpp"

using namespace clm;
using TD = nn::Tensor<double>;

namespace {

// Denoiser stand-in: returns, for every row, the embedding stored for the
// row's target position, and records what it was given.
class StubDenoiser final : public ConceptDenoiser<double> {
 public:
  explicit StubDenoiser(std::size_t d) { config_.d_embedding = d; config_.t_train = 100; config_.cfg_drop_prob = 0.0; }

  const ModelConfig& config() const override { return config_; }
  nn::ParameterStore<double>& parameters() override { return params_; }
  TD encode_context(const TD& embeddings) const override {
    context_rows = embeddings.rows();
    return embeddings;
  }
  TD denoise(const TD& x_t, const std::vector<DenoiseRow>& rows, const TD&) const override {
    seen_x_t.assign(x_t.data().begin(), x_t.data().end());
    seen_rows = rows;
    std::vector<double> out;
    for (const auto& r : rows) {
      const auto it = outputs.find(r.position);
      if (it == outputs.end()) {
        out.insert(out.end(), config_.d_embedding, 0.0);
      } else {
        out.insert(out.end(), it->second.begin(), it->second.end());
      }
    }
    return TD::from({rows.size(), config_.d_embedding}, std::move(out));
  }

  std::map<std::size_t, std::vector<double>> outputs;
  mutable std::vector<double> seen_x_t;
  mutable std::vector<DenoiseRow> seen_rows;
  mutable std::size_t context_rows = 0;

 private:
  ModelConfig config_;
  nn::ParameterStore<double> params_;
};

TrainingExample make_example(const std::string& id, const std::vector<std::vector<float>>& rows,
                             std::vector<bool> mask) {
  TrainingExample ex{id, {}, std::move(mask)};
  for (const auto& r : rows) ex.embeddings.emplace_back(r);
  return ex;
}

TrainingExample random_example(Rng& rng, const std::string& id, std::size_t len, std::size_t d,
                               std::size_t first_target = 1) {
  TrainingExample ex{id, {}, {}};
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<float> v(d);
    for (float& x : v) x = static_cast<float>(rng.normal());
    ex.embeddings.emplace_back(std::move(v));
    ex.loss_mask.push_back(i >= first_target);
  }
  return ex;
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.d_embedding = 4;
  c.d_model = 8;
  c.n_ctx_layers = 1;
  c.n_den_layers = 1;
  c.n_heads = 2;
  c.max_positions = 8;
  c.t_train = 10;
  c.init_std = 0.3;
  return c;
}

std::vector<nlohmann::json> read_metrics(const std::filesystem::path& path) {
  std::vector<nlohmann::json> out;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) out.push_back(nlohmann::json::parse(line));
  return out;
}

std::string file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("oracle denoiser gives zero loss") {
  StubDenoiser stub(3);
  const NoiseSchedule sched(100);
  const auto ex = make_example("a", {{1, 2, 3}, {0.5f, -1, 2}, {4, 4, -4}}, {false, true, true});
  stub.outputs[1] = {0.5, -1, 2};
  stub.outputs[2] = {4, 4, -4};
  CHECK(batch_loss<double>(stub, sched, {&ex}, 7, 1, false) == 0.0);

  const auto inst = make_example("b", {{1, 1, 1}, {2, 2, 2}, {0.5f, -1, 2}, {4, 4, -4}}, {false, false, true, true});
  stub.outputs.clear();
  stub.outputs[2] = {0.5, -1, 2};
  stub.outputs[3] = {4, 4, -4};
  CHECK(batch_loss<double>(stub, sched, {&inst}, 7, 1, false) == 0.0);
}

TEST_CASE("two-sentence loss matches a hand trace") {
  StubDenoiser stub(2);
  stub.outputs[1] = {0.25, -0.5};
  const NoiseSchedule sched(100);
  const auto ex = make_example("doc", {{1.0f, -2.0f}, {0.5f, 1.5f}}, {false, true});

  const double loss = batch_loss<double>(stub, sched, {&ex}, 3, 5, false);

  const InstanceDraws draws = draw_instance(3, "doc", 5, 1, 2, 100, 0.0);
  const auto x_t = q_sample(sched, ex.embeddings[1].values(), draws.timesteps[0], draws.noise[0]);
  REQUIRE(stub.seen_rows.size() == 1);
  CHECK(stub.seen_rows[0].timestep == draws.timesteps[0]);
  CHECK(stub.seen_rows[0].position == 1);
  CHECK(stub.seen_rows[0].conditional);
  CHECK(stub.context_rows == 1);
  CHECK(stub.seen_x_t == std::vector<double>{x_t[0], x_t[1]});
  const double expected = ((0.25 - 0.5) * (0.25 - 0.5) + (-0.5 - 1.5) * (-0.5 - 1.5)) / 2.0;
  CHECK(loss == doctest::Approx(expected).epsilon(1e-12));
  CHECK(loss >= 0.0);
}

TEST_CASE("batch loss averages over predicted positions") {
  StubDenoiser stub(1);
  const NoiseSchedule sched(100);
  // Stub predicts 0 everywhere, so each position contributes target^2.
  const auto a = make_example("a", {{9}, {1}, {2}}, {false, true, true});
  const auto b = make_example("b", {{9}, {9}, {3}}, {false, false, true});
  const double loss = batch_loss<double>(stub, sched, {&a, &b}, 0, 1, false);
  CHECK(loss == doctest::Approx((1.0 + 4.0 + 9.0) / 3.0).epsilon(1e-12));
  CHECK(batch_loss<double>(stub, sched, {&b, &a}, 0, 1, false) == loss);

  const auto lone = make_example("c", {{1}}, {false});
  try {
    batch_loss<double>(stub, sched, {&lone}, 0, 1, false);
    FAIL("expected NoPredictablePositions");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoPredictablePositions);
  }
}

TEST_CASE("per-instance draws are keyed by seed, id and step") {
  const auto a = draw_instance(1, "x", 3, 2, 4, 100, 0.5);
  const auto b = draw_instance(1, "x", 3, 2, 4, 100, 0.5);
  CHECK(a.timesteps == b.timesteps);
  CHECK(a.noise == b.noise);
  CHECK(draw_instance(1, "x", 4, 2, 4, 100, 0.5).noise != a.noise);
  CHECK(draw_instance(1, "y", 3, 2, 4, 100, 0.5).noise != a.noise);
  CHECK(draw_instance(2, "x", 3, 2, 4, 100, 0.5).noise != a.noise);
  for (std::size_t t : a.timesteps) CHECK(t < 100);
}

TEST_CASE("loss is invariant to batch order on the real model") {
  TwoTowerModel<double> model(tiny_config(), 2);
  const NoiseSchedule sched(10);
  Rng rng(1);
  std::vector<TrainingExample> exs;
  for (int i = 0; i < 4; ++i) exs.push_back(random_example(rng, "e" + std::to_string(i), 3 + i, 4));
  std::vector<const TrainingExample*> batch;
  for (const auto& e : exs) batch.push_back(&e);
  const double forward = batch_loss<double>(model, sched, batch, 9, 1, false);
  std::reverse(batch.begin(), batch.end());
  CHECK(batch_loss<double>(model, sched, batch, 9, 1, false) == forward);
}

TEST_CASE("end-to-end loss gradient matches finite differences") {
  TwoTowerModel<double> model(tiny_config(), 8);
  const NoiseSchedule sched(10);
  Rng rng(17);
  const TrainingExample ex = random_example(rng, "g", 5, 4);
  const InstanceDraws draws = draw_instance(0, "g", 1, 4, 4, 10, 0.0);
  auto loss = [&] { return example_loss<double>(model, sched, ex, draws, 4); };

  model.parameters().zero_grad();
  loss().backward();

  auto& entries = model.parameters().entries();
  double worst = 0.0;
  for (int probe = 0; probe < 20; ++probe) {
    auto& p = entries[rng.uniform_int(entries.size())].tensor;
    const std::size_t i = rng.uniform_int(p.numel());
    const double analytic = p.has_grad() ? p.grad()[i] : 0.0;
    const double saved = p.data()[i];
    const double h = 1e-5;
    p.data()[i] = saved + h;
    const double up = loss().item();
    p.data()[i] = saved - h;
    const double down = loss().item();
    p.data()[i] = saved;
    const double numeric = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6}));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("context positions never contribute to the instruction loss") {
  TwoTowerModel<double> model(tiny_config(), 4);
  const NoiseSchedule sched(10);
  Rng rng(23);
  // Positions 0..3 are context, 4..5 are targets.
  const TrainingExample ex = random_example(rng, "inst", 6, 4, 4);
  const InstanceDraws draws = draw_instance(0, "inst", 1, 2, 4, 10, 0.0);
  auto loss = [&] { return example_loss<double>(model, sched, ex, draws, 2).item(); };

  model.parameters().zero_grad();
  example_loss<double>(model, sched, ex, draws, 2).backward();
  auto& positions = model.parameters().get("den.positions");
  const std::size_t m = tiny_config().d_model;
  for (std::size_t row = 0; row < 7; ++row) {
    double max_grad = 0.0, max_fd = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      const std::size_t i = row * m + c;
      max_grad = std::max(max_grad, std::abs(positions.grad()[i]));
      const double saved = positions.data()[i];
      positions.data()[i] = saved + 1e-5;
      const double up = loss();
      positions.data()[i] = saved - 1e-5;
      const double down = loss();
      positions.data()[i] = saved;
      max_fd = std::max(max_fd, std::abs(up - down) / 2e-5);
    }
    if (row == 4 || row == 5) {
      CHECK(max_grad > 1e-8);
      CHECK(max_fd > 1e-8);
    } else {
      CHECK(max_grad == 0.0);
      CHECK(max_fd == 0.0);
    }
  }

  // A longer context leaves the number of loss positions unchanged.
  TrainingExample longer = ex;
  longer.embeddings.insert(longer.embeddings.begin() + 1, ex.embeddings.begin() + 1, ex.embeddings.begin() + 4);
  longer.loss_mask.insert(longer.loss_mask.begin(), 3, false);
  CHECK(longer.target_count() == ex.target_count());
}

TEST_CASE("training configuration") {
  const TrainConfig pre = TrainConfig::pretrain_defaults();
  CHECK(pre.steps == 250000);
  CHECK(pre.peak_lr == 4e-4);
  CHECK(pre.warmup == 10000);
  CHECK(pre.weight_decay == 0.1);
  CHECK(pre.sentence_budget == 229376);
  const TrainConfig fine = TrainConfig::finetune_defaults();
  CHECK(fine.steps == 20000);
  CHECK(fine.peak_lr == 1e-5);
  CHECK(fine.warmup == 0);
  CHECK(fine.weight_decay == 0.01);
  CHECK(fine.instance_budget == 512);

  TrainConfig bad = pre;
  bad.steps = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = pre;
  bad.sentence_budget = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("training run: metrics, checkpoints and bitwise resume") {
  testing::TempDir dir("train");
  const NoiseSchedule sched(10);
  Rng rng(31);
  std::vector<TrainingExample> exs;
  for (int i = 0; i < 5; ++i) exs.push_back(random_example(rng, "d" + std::to_string(i), 3 + i % 3, 4));
  const std::vector<TrainingExample> pristine = exs;

  TrainConfig cfg;
  cfg.steps = 6;
  cfg.peak_lr = 1e-2;
  cfg.warmup = 2;
  cfg.sentence_budget = 10;
  cfg.checkpoint_every = 2;
  cfg.seed = 5;
  RunOptions opts;
  opts.config_hash = "abc";
  opts.version = "test";

  TwoTowerModel<float> full_model(tiny_config(), 1);
  const RunResult full = run_training(full_model, sched, exs, cfg, dir / "full", opts);
  CHECK(full.last_step == 6);
  CHECK(full.losses.size() == 6);
  for (const char* f : {"step_000002.clmw", "step_000004.opt", "step_000006.meta.json", "final.clmw", "final.opt"}) {
    CHECK(std::filesystem::exists(dir / "full" / f));
  }
  const auto metrics = read_metrics(dir / "full" / "metrics.jsonl");
  REQUIRE(metrics.size() == 6);
  const auto schedule = cfg.lr_schedule();
  for (std::size_t s = 0; s < 6; ++s) {
    CHECK(metrics[s]["step"] == s + 1);
    CHECK(metrics[s]["lr"].get<double>() == schedule.lr_at(s + 1));
    CHECK(metrics[s].contains("wall_ms"));
  }
  // Training never touches the example data.
  for (std::size_t i = 0; i < exs.size(); ++i) {
    for (std::size_t j = 0; j < exs[i].embeddings.size(); ++j) {
      const auto now = exs[i].embeddings[j].values();
      const auto before = pristine[i].embeddings[j].values();
      CHECK(std::equal(now.begin(), now.end(), before.begin(), before.end()));
    }
  }

  RunOptions stop = opts;
  stop.stop_after = 3;
  TwoTowerModel<float> first(tiny_config(), 1);
  const RunResult part = run_training(first, sched, exs, cfg, dir / "resumed", stop);
  CHECK(part.last_step == 3);
  CHECK(std::filesystem::exists(dir / "resumed" / "step_000003.clmw"));

  RunOptions again = opts;
  again.resume = true;
  TwoTowerModel<float> second(tiny_config(), 99);  // weights come from the checkpoint
  const RunResult rest = run_training(second, sched, exs, cfg, dir / "resumed", again);
  CHECK(rest.first_step == 4);
  CHECK(rest.last_step == 6);
  const auto resumed = read_metrics(dir / "resumed" / "metrics.jsonl");
  REQUIRE(resumed.size() == 6);
  for (std::size_t s = 0; s < 6; ++s) {
    CHECK(resumed[s]["loss"].get<double>() == metrics[s]["loss"].get<double>());
    CHECK(resumed[s]["lr"].get<double>() == metrics[s]["lr"].get<double>());
  }
  CHECK(file_bytes(dir / "resumed" / "final.clmw") == file_bytes(dir / "full" / "final.clmw"));
  CHECK(file_bytes(dir / "resumed" / "final.opt") == file_bytes(dir / "full" / "final.opt"));

  RunOptions wrong = again;
  wrong.config_hash = "different";
  TwoTowerModel<float> third(tiny_config(), 1);
  try {
    run_training(third, sched, exs, cfg, dir / "resumed", wrong);
    FAIL("expected ResumeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kResumeMismatch);
  }

  const auto latest = latest_checkpoint(dir / "full");
  REQUIRE(latest.has_value());
  CHECK(latest->step == 6);
}

TEST_CASE("training on nothing predictable is rejected") {
  testing::TempDir dir("empty");
  TwoTowerModel<float> model(tiny_config(), 1);
  const std::vector<TrainingExample> exs = {make_example("x", {{1, 2, 3, 4}}, {false})};
  TrainConfig cfg;
  cfg.steps = 1;
  cfg.warmup = 0;
  try {
    run_training(model, NoiseSchedule(10), exs, cfg, dir.path(), RunOptions{});
    FAIL("expected EmptyCorpus");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyCorpus);
  }
}
