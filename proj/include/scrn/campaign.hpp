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

#include "scrn/train.hpp"

namespace scrn {

// Victim adapter over the trained detector model. Prediction is a pure
// function of the text: in `sample` mode the per-text noise seed derives
// from the model's run-level inference seed and the token ids, so shared
// concurrent use is safe and campaigns are reproducible.
class ModelVictim : public Victim {
 public:
  ModelVictim(const SCRNModel& model, const WordTokenizer& tokenizer);
  Prediction predict(const std::string& text) const override;

 private:
  const SCRNModel& model_;
  const WordTokenizer& tokenizer_;
};

class MetricVictim : public Victim {
 public:
  explicit MetricVictim(const MetricDetector& det) : det_(det) {}
  Prediction predict(const std::string& text) const override;

 private:
  const MetricDetector& det_;
};

// Attack-result stream persistence: line-delimited JSON with every field,
// flushed per record so partial campaigns survive aborts.
void append_attack_result(std::ostream& out, const AttackResult& r);
std::vector<AttackResult> read_attack_log(const std::filesystem::path& path);

struct CampaignOutput {
  ClassificationReport clean;
  std::map<std::string, RobustnessReport> by_attack;
  std::filesystem::path csv_path;
  std::filesystem::path md_path;
  std::map<std::string, std::filesystem::path> log_paths;
};

// Runs one attack method over the attack set (optionally with worker
// threads; results are ordered by sample id regardless of scheduling).
std::vector<AttackResult> run_attack_over_set(
    const Victim& victim, const std::vector<const CorpusRecord*>& samples,
    const std::string& attack_name, const AttackConfig& config,
    const Thesaurus& thesaurus, size_t workers);

// Clean evaluation + all configured attacks + reports (CSV, markdown, raw
// attack logs) under out_dir.
CampaignOutput run_campaign(const ExperimentConfig& cfg, const Corpus& corpus,
                            const Victim& victim, const std::string& method_name);

// Rebuilds the robustness report for each persisted log (no re-attacking)
// and rewrites CSV/markdown from it.
CampaignOutput report_from_logs(const ExperimentConfig& cfg,
                                const std::vector<std::string>& attack_names,
                                const std::string& method_name);

// AUA of one full attack evaluation (re-attacking) at a given inference
// seed.
double campaign_aua(SCRNModel& model, const WordTokenizer& tokenizer,
                    const std::vector<const CorpusRecord*>& samples,
                    const std::string& attack_name, const AttackConfig& config,
                    const Thesaurus& thesaurus, size_t workers, uint64_t inference_seed);

// AUA of an already-attacked set re-scored under one inference seed: the
// perturbed texts stay fixed and only the branch noise changes, which
// isolates how much the model's predictions move between noise draws.
double rescored_aua(SCRNModel& model, const WordTokenizer& tokenizer,
                    const std::vector<AttackResult>& results, uint64_t inference_seed);

std::vector<const CorpusRecord*> attack_samples(const Corpus& corpus);

}  // namespace scrn
