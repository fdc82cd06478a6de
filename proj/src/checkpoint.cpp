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

#include "scrn/checkpoint.hpp"

#include <fstream>

#include "json.hpp"

namespace scrn {

using nlohmann::json;

const char* build_id() {
#ifdef SCRN_BUILD_ID
  return SCRN_BUILD_ID;
#else
  return "dev";
#endif
}

namespace {

json manifest_to_json(const CheckpointManifest& m) {
  return json{{"format_version", m.format_version},
              {"build", m.build},
              {"config", m.config_echo},
              {"step", m.step},
              {"final_train_accuracy", m.final_train_accuracy},
              {"best_val_accuracy", m.best_val_accuracy},
              {"param_count", m.param_count},
              {"vocab_size", m.vocab_size}};
}

CheckpointManifest manifest_from_json(const json& j) {
  CheckpointManifest m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != 1) {
    throw IoError("unsupported checkpoint format version " +
                  std::to_string(m.format_version));
  }
  m.build = j.at("build").get<std::string>();
  m.config_echo = j.at("config").get<std::map<std::string, std::string>>();
  m.step = j.at("step").get<size_t>();
  m.final_train_accuracy = j.at("final_train_accuracy").get<double>();
  m.best_val_accuracy = j.at("best_val_accuracy").get<double>();
  m.param_count = j.at("param_count").get<size_t>();
  m.vocab_size = j.at("vocab_size").get<size_t>();
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const SCRNModel& model,
                     const Vocabulary& vocab, const CheckpointManifest& manifest) {
  std::filesystem::create_directories(dir);
  CheckpointManifest m = manifest;
  m.param_count = model.param_count();
  m.vocab_size = vocab.size();
  {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
    out << manifest_to_json(m).dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "params.bin", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "params.bin").string());
    const uint64_t count = m.param_count;
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    for (const Param* p : model.params()) {
      out.write(reinterpret_cast<const char*>(p->value.a.data()),
                static_cast<std::streamsize>(p->size() * sizeof(double)));
    }
  }
  {
    std::ofstream out(dir / "vocab.txt");
    if (!out) throw IoError("cannot write " + (dir / "vocab.txt").string());
    for (const std::string& w : vocab.words()) out << w << '\n';
  }
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
  json j;
  {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw IoError("cannot open " + (dir / "manifest.json").string());
    in >> j;
  }
  CheckpointManifest manifest = manifest_from_json(j);

  std::vector<std::string> words;
  {
    std::ifstream in(dir / "vocab.txt");
    if (!in) throw IoError("cannot open " + (dir / "vocab.txt").string());
    std::string line;
    while (std::getline(in, line)) words.push_back(line);
  }
  if (words.size() != manifest.vocab_size) {
    throw IoError("checkpoint vocab size " + std::to_string(words.size()) +
                  " does not match manifest " + std::to_string(manifest.vocab_size));
  }
  Vocabulary vocab = Vocabulary::from_words(words);

  // Rebuild the model from the config echo.
  ExperimentConfig cfg = parse_experiment_config(manifest.config_echo);
  auto model = std::make_unique<SCRNModel>(cfg.model, cfg.flags, vocab.size(),
                                           cfg.seed_model);
  model->set_inference_seed(cfg.seed_noise);
  if (model->param_count() != manifest.param_count) {
    throw IoError("checkpoint parameter count " + std::to_string(manifest.param_count) +
                  " does not match the configured model (" +
                  std::to_string(model->param_count()) + ")");
  }
  {
    std::ifstream in(dir / "params.bin", std::ios::binary);
    if (!in) throw IoError("cannot open " + (dir / "params.bin").string());
    uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (count != manifest.param_count) {
      throw IoError("checkpoint blob header disagrees with the manifest");
    }
    for (Param* p : model->params()) {
      in.read(reinterpret_cast<char*>(p->value.a.data()),
              static_cast<std::streamsize>(p->size() * sizeof(double)));
      if (!in) throw IoError("checkpoint blob truncated");
    }
  }
  return LoadedCheckpoint{std::move(model), WordTokenizer(std::move(vocab)),
                          std::move(manifest)};
}

void save_metric_detector(const std::filesystem::path& dir, const MetricDetector& det) {
  std::filesystem::create_directories(dir);
  json rows = json::array();
  const auto& table = det.lm().rows();
  for (size_t prev = 0; prev < table.size(); ++prev) {
    for (const auto& [next, count] : table[prev]) {
      rows.push_back(json::array({prev, next, count}));
    }
  }
  const json j{
      {"format_version", 1},
      {"build", build_id()},
      {"feature", detector_feature_name(det.feature())},
      {"threshold", det.threshold()},
      {"smoothing", det.lm().smoothing()},
      {"vocab", det.tokenizer().vocab().words()},
      {"bigram_counts", rows},
      {"clf_mean", det.classifier().feature_means()},
      {"clf_std", det.classifier().feature_stds()},
      {"clf_w", det.classifier().weights()},
      {"clf_b", det.classifier().bias()},
  };
  std::ofstream out(dir / "metric.json");
  if (!out) throw IoError("cannot write " + (dir / "metric.json").string());
  out << j.dump(2) << '\n';
}

MetricDetector load_metric_detector(const std::filesystem::path& dir) {
  std::ifstream in(dir / "metric.json");
  if (!in) throw IoError("cannot open " + (dir / "metric.json").string());
  json j;
  in >> j;
  if (j.at("format_version").get<int>() != 1) {
    throw IoError("unsupported metric checkpoint version");
  }
  Vocabulary vocab = Vocabulary::from_words(j.at("vocab").get<std::vector<std::string>>());
  BigramLM lm(vocab.size(), j.at("smoothing").get<double>());
  for (const auto& row : j.at("bigram_counts")) {
    lm.set_count(row.at(0).get<int>(), row.at(1).get<int>(), row.at(2).get<double>());
  }
  FeatureClassifier clf = FeatureClassifier::from_state(
      j.at("clf_mean").get<std::vector<double>>(),
      j.at("clf_std").get<std::vector<double>>(),
      j.at("clf_w").get<std::vector<double>>(), j.at("clf_b").get<double>());
  return MetricDetector(WordTokenizer(std::move(vocab)), std::move(lm), std::move(clf),
                        parse_detector_feature(j.at("feature").get<std::string>()),
                        j.at("threshold").get<double>());
}

bool is_metric_checkpoint(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir / "metric.json");
}

}  // namespace scrn
