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

#include <memory>

#include "scrn/config.hpp"
#include "scrn/metric_detectors.hpp"
#include "scrn/model.hpp"

namespace scrn {

// Identifier baked in at build time; keeps checkpoint manifests stable
// across reruns of the same binary.
const char* build_id();

// A checkpoint is a directory: manifest.json (format-versioned config echo,
// step counter, seeds, dims), params.bin (opaque little-endian double blob
// in parameter-store order), vocab.txt (one token per line).
struct CheckpointManifest {
  int format_version = 1;
  std::string build;
  std::map<std::string, std::string> config_echo;
  size_t step = 0;
  double final_train_accuracy = -1.0;
  double best_val_accuracy = -1.0;
  size_t param_count = 0;
  size_t vocab_size = 0;
};

void save_checkpoint(const std::filesystem::path& dir, const SCRNModel& model,
                     const Vocabulary& vocab, const CheckpointManifest& manifest);

struct LoadedCheckpoint {
  std::unique_ptr<SCRNModel> model;
  WordTokenizer tokenizer;
  CheckpointManifest manifest;
};

// Rebuilds the model from the manifest's config echo and loads parameters,
// validating dimensions against the manifest.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

// Metric-detector persistence (single JSON file in the directory).
void save_metric_detector(const std::filesystem::path& dir, const MetricDetector& det);
MetricDetector load_metric_detector(const std::filesystem::path& dir);
bool is_metric_checkpoint(const std::filesystem::path& dir);

}  // namespace scrn
