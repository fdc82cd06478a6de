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

#include <functional>

#include "scrn/attacks.hpp"
#include "scrn/losses.hpp"
#include "scrn/model.hpp"

namespace scrn {

struct DirectionStats {
  size_t samples = 0;
  size_t attacked = 0;       // attack actually ran (original prediction correct)
  double oa_percent = 0.0;   // clean accuracy on the attack set
  double aua_percent = 0.0;  // accuracy after the attack
  double asr_percent = 0.0;  // flipped / originally correct
  double anq = 0.0;          // mean queries over attacked samples
};

struct RobustnessReport {
  DirectionStats ai_to_human;
  DirectionStats human_to_ai;
  DirectionStats overall;

  const DirectionStats& direction(AttackDirection d) const {
    return d == AttackDirection::ai_to_human ? ai_to_human : human_to_ai;
  }
};

// Aggregates attack results per direction and pooled. Attacks target only
// initially-correct samples, so ASR = 100 * (OA - AUA) / OA when OA > 0.
RobustnessReport robustness_metrics(const std::vector<AttackResult>& results);

struct ClassificationReport {
  // Percentages. The two views treat ai resp. human as the positive class.
  double precision_ai = 0.0, recall_ai = 0.0;
  double precision_human = 0.0, recall_human = 0.0;
  double micro_f1 = 0.0;
  // Confusion counts with ai as positive.
  size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

ClassificationReport classification_report(const std::vector<Label>& predictions,
                                           const std::vector<Label>& labels);

struct ThresholdResult {
  double threshold = 0.0;   // classification rule: score > threshold
  double achieved_fpr = 0.0;
  bool degenerate = false;  // no separation margin among negative scores
  bool everything_positive = false;  // threshold is the -inf sentinel
};

// Picks the smallest threshold whose false-positive rate on the calibration
// scores stays within target_fpr: with m negatives sorted descending and
// k = floor(target_fpr * m), the threshold is the (k+1)-th largest negative
// score. target_fpr >= 1 admits everything (sentinel -inf).
ThresholdResult threshold_at_fpr(const std::vector<double>& scores,
                                 const std::vector<Label>& labels, double target_fpr,
                                 Label positive = Label::ai);

struct FluctuationReport {
  std::vector<std::pair<uint64_t, double>> aua_by_seed;
  double spread = 0.0;  // max - min
};

// Runs the supplied evaluation once per inference seed and reports the AUA
// spread. `aua_for_seed` must rerun the identical attack evaluation with
// the model's run-level noise seed set to the given value.
FluctuationReport fluctuation_analysis(const std::function<double(uint64_t)>& aua_for_seed,
                                       const std::vector<uint64_t>& seeds);

// The documented model variants.
enum class AblationVariant {
  scrn,              // full model
  no_sc,             // drop the calibration loss; single-branch training
  no_reconstruction, // replace the reconstruction net with dropout on h
  no_noise,          // zero noise in training and inference
  no_reg,            // beta = 0
  baseline_encoder,  // encoder + classifier head only
};

AblationVariant parse_ablation(std::string_view name);
std::string ablation_name(AblationVariant v);

struct AblationDeltas {
  AblationVariant variant = AblationVariant::scrn;
  TrainingObjective objective = TrainingObjective::siamese;
  VariantFlags flags;
  bool force_zero_noise = false;   // zero noise in training and inference
  double lambda3_override = -1.0;  // >= 0 replaces lambda3
  double beta_override = -1.0;     // >= 0 replaces beta
};

// Maps a variant name to its configuration deltas.
AblationDeltas build_ablation(AblationVariant variant);

void apply_ablation(const AblationDeltas& deltas, ModelConfig& model,
                    VariantFlags& flags, LossHyperParams& hp,
                    TrainingObjective& objective);

// --- report rendering (fixed column order) ---

struct ReportRow {
  std::string method;
  std::string attack;
  std::string direction;
  DirectionStats stats;
};

std::vector<ReportRow> report_rows(const std::string& method, const std::string& attack,
                                   const RobustnessReport& report);
// method,attack,direction,OA,AUA,ASR,ANQ with %.2f numbers.
std::string robustness_csv(const std::vector<ReportRow>& rows);
std::string robustness_markdown(const std::vector<ReportRow>& rows);

std::string classification_csv(const std::string& method,
                               const ClassificationReport& report);
std::string classification_markdown(const std::string& method,
                                    const ClassificationReport& report);

}  // namespace scrn
