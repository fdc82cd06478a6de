/* Copyright 2026 The scrn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <filesystem>
#include <map>

#include "scrn/eval.hpp"

namespace scrn {

// Flat `key = value` configuration text with namespaced keys. `#` starts a
// comment. Unknown keys are errors, not warnings.
std::map<std::string, std::string> parse_flat_config(const std::string& text);
std::map<std::string, std::string> read_flat_config(const std::filesystem::path& path);

// Applies a `key=value` override string.
void apply_override(std::map<std::string, std::string>& kv, const std::string& assignment);

struct ExperimentConfig {
  // data
  std::string data_format = "synthetic";
  std::string data_path;
  std::string data_out = "corpus.jsonl";
  std::string eval_path;  // cross-domain/genre: separate evaluation corpus
  std::string eval_format = "jsonl-v1";
  std::string scenario = "in-domain";
  double train_fraction = 0.9;
  size_t synthetic_train = 2000;
  size_t synthetic_test = 200;

  // model + method
  std::string method = "scrn";  // scrn | log-likelihood | log-rank | entropy | gltr
  ModelConfig model = ModelConfig::toy_default();
  VariantFlags flags;
  std::string ablation = "SCRN";
  std::string train_mode = "scrn";  // scrn | flooding | rdrop

  // loss
  LossHyperParams loss;

  // training
  size_t batch = 16;
  size_t epochs = 2;
  double lr = 1e-4;
  double weight_decay = 0.01;
  double val_fraction = 0.05;
  std::string checkpoint_dir = "checkpoint";
  std::string runlog = "runlog.jsonl";

  // attacks
  std::vector<std::string> attack_methods{"pwws", "deepwordbug", "pruthi"};
  size_t attack_n_per_class = 200;
  AttackBudget budget;
  WordFilter filter;
  size_t pruthi_max_words = 3;
  size_t workers = 1;
  std::string out_dir = "out";
  std::string thesaurus_path;  // empty: bundled synthetic thesaurus

  // evaluation extras
  std::vector<uint64_t> fluctuation_seeds;
  double target_fpr = -1.0;  // < 0 disables the fixed-FPR analysis

  // seeds: every random choice traces to exactly one of these
  uint64_t seed_data = 1;
  uint64_t seed_model = 2;
  uint64_t seed_noise = 3;
  uint64_t seed_attack = 4;

  // Resolved training objective and loss deltas (ablation + train mode).
  TrainingObjective objective = TrainingObjective::siamese;

  AttackConfig attack_config() const;
  std::map<std::string, std::string> echo() const;  // flat key=value dump
};

// Builds an ExperimentConfig from flat keys, consuming every recognized key
// and rejecting the rest.
ExperimentConfig parse_experiment_config(std::map<std::string, std::string> kv);

}  // namespace scrn
