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

#include "scrn/checkpoint.hpp"
#include "scrn/corpus.hpp"
#include "scrn/optim.hpp"

namespace scrn {

struct TrainOutcome {
  double final_train_accuracy = 0.0;
  double best_val_accuracy = 0.0;
  size_t steps = 0;
  std::filesystem::path latest_dir;
  std::filesystem::path best_dir;
};

// Full training entry point for the detector model configured in `cfg`:
// fits the tokenizer on the train split, runs the (possibly siamese)
// objective with AdamW and linear learning-rate decay, appends one record
// per optimizer step to the run log, and writes `latest` plus
// `best` (by held-out validation accuracy) checkpoints under
// cfg.checkpoint_dir. Aborts with NumericError on divergence, naming the
// offending step.
TrainOutcome train_model(const ExperimentConfig& cfg, const Corpus& corpus);

// Fits a metric detector (bigram LM + feature classifier) on the train
// split and stores it under cfg.checkpoint_dir.
TrainOutcome train_metric_detector(const ExperimentConfig& cfg, const Corpus& corpus);

// Dispatches on cfg.method.
TrainOutcome train_from_config(const ExperimentConfig& cfg, const Corpus& corpus);

}  // namespace scrn
