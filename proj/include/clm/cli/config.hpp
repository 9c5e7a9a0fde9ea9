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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "clm/data/normalizer.hpp"
#include "clm/data/sequences.hpp"
#include "clm/diffusion/diffusion.hpp"
#include "clm/eval/protocols.hpp"
#include "clm/model/two_tower.hpp"
#include "clm/segment/segmenter.hpp"
#include "clm/train/trainer.hpp"

namespace clm::cli {

struct ConfigKey {
  std::string name;  // "section.key"
  std::string default_value;
  std::string description;
};

// Every accepted key with its default, in documentation order.
const std::vector<ConfigKey>& config_keys();

// Resolved "section.key" -> value strings. Starts from the defaults; files
// and overrides may only name registered keys.
class ConfigValues {
 public:
  ConfigValues();

  // INI file with [section] headers. Unknown sections or keys raise
  // InvalidConfig naming the offending key.
  void load_ini(const std::filesystem::path& path);
  // "section.key=value".
  void set(std::string_view assignment);
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  // One "key=value" line per key in sorted order. run.workers is left out:
  // it changes scheduling, never results.
  std::string canonical() const;
  // 16 hex digits of FNV-1a over canonical().
  std::string hash() const;

 private:
  std::map<std::string, std::string> values_;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  std::string codec_kind = "toy";
  std::size_t dimension = 64;
  std::string socket_host;
  std::uint16_t socket_port = 0;
  std::string sentinel_table;  // empty: bundled table

  SegmentationConfig segmentation;
  EotLanguage eot_language = EotLanguage::kDocument;
  std::size_t normalizer_sample_cap = 100000;
  ZeroIqrFallback zero_iqr_fallback = ZeroIqrFallback::kStd;

  ModelConfig model;
  double schedule_offset = 0.008;

  TrainConfig pretrain = TrainConfig::pretrain_defaults();
  TrainConfig finetune = TrainConfig::finetune_defaults();

  SamplerParams sampler;
  double eot_threshold = 0.90;
  std::size_t pretrain_eval_max_sentences = 1;
  std::size_t instruct_max_sentences = 16;
  bool reencode = false;

  PrefixEvalConfig prefix_eval;
  std::size_t align_per_lang_cap = 1000;

  std::string config_hash;

  // Parses and validates every key. Errors are InvalidConfig and name the key.
  static RunConfig from(const ConfigValues& values);
};

}  // namespace clm::cli
