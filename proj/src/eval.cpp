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

#include "scrn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace scrn {

namespace {

DirectionStats stats_from_counts(size_t samples, size_t orig_correct,
                                 size_t final_correct, size_t attacked,
                                 size_t attacked_queries) {
  DirectionStats s;
  s.samples = samples;
  s.attacked = attacked;
  if (samples == 0) return s;
  s.oa_percent = 100.0 * static_cast<double>(orig_correct) / static_cast<double>(samples);
  s.aua_percent =
      100.0 * static_cast<double>(final_correct) / static_cast<double>(samples);
  if (orig_correct > 0) {
    s.asr_percent = 100.0 *
                    static_cast<double>(orig_correct - final_correct) /
                    static_cast<double>(orig_correct);
  }
  if (attacked > 0) {
    s.anq = static_cast<double>(attacked_queries) / static_cast<double>(attacked);
  }
  return s;
}

}  // namespace

RobustnessReport robustness_metrics(const std::vector<AttackResult>& results) {
  if (results.empty()) throw InputError("robustness_metrics: no results");
  size_t samples[2] = {0, 0}, orig_ok[2] = {0, 0}, final_ok[2] = {0, 0};
  size_t attacked[2] = {0, 0}, queries[2] = {0, 0};
  for (const AttackResult& r : results) {
    r.validate();
    const int d = r.direction() == AttackDirection::ai_to_human ? 0 : 1;
    ++samples[d];
    if (r.original_prediction == r.true_label) {
      ++orig_ok[d];
      // Only initially-correct samples get attacked.
      ++attacked[d];
      queries[d] += r.queries;
      if (r.final_prediction == r.true_label) ++final_ok[d];
    }
  }
  RobustnessReport report;
  report.ai_to_human =
      stats_from_counts(samples[0], orig_ok[0], final_ok[0], attacked[0], queries[0]);
  report.human_to_ai =
      stats_from_counts(samples[1], orig_ok[1], final_ok[1], attacked[1], queries[1]);
  report.overall = stats_from_counts(samples[0] + samples[1], orig_ok[0] + orig_ok[1],
                                     final_ok[0] + final_ok[1],
                                     attacked[0] + attacked[1], queries[0] + queries[1]);
  return report;
}

ClassificationReport classification_report(const std::vector<Label>& predictions,
                                           const std::vector<Label>& labels) {
  if (predictions.empty() || predictions.size() != labels.size()) {
    throw InputError("classification_report: predictions/labels mismatch");
  }
  ClassificationReport r;
  for (size_t i = 0; i < labels.size(); ++i) {
    const bool pred_ai = predictions[i] == Label::ai;
    const bool is_ai = labels[i] == Label::ai;
    if (pred_ai && is_ai) ++r.tp;
    else if (pred_ai && !is_ai) ++r.fp;
    else if (!pred_ai && is_ai) ++r.fn;
    else ++r.tn;
  }
  auto pct = [](size_t num, size_t den) {
    return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
  };
  r.precision_ai = pct(r.tp, r.tp + r.fp);
  r.recall_ai = pct(r.tp, r.tp + r.fn);
  r.precision_human = pct(r.tn, r.tn + r.fn);
  r.recall_human = pct(r.tn, r.tn + r.fp);
  // Micro averaging pools per-class true positives and errors; for
  // single-label binary data this equals accuracy.
  const size_t micro_tp = r.tp + r.tn;
  const size_t micro_fp = r.fp + r.fn;
  const size_t micro_fn = r.fn + r.fp;
  r.micro_f1 = pct(2 * micro_tp, 2 * micro_tp + micro_fp + micro_fn);
  return r;
}

ThresholdResult threshold_at_fpr(const std::vector<double>& scores,
                                 const std::vector<Label>& labels, double target_fpr,
                                 Label positive) {
  if (scores.empty() || scores.size() != labels.size()) {
    throw InputError("threshold_at_fpr: scores/labels mismatch");
  }
  std::vector<double> negatives;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != positive) negatives.push_back(scores[i]);
  }
  if (negatives.empty()) throw InputError("threshold_at_fpr: no negative samples");
  std::sort(negatives.begin(), negatives.end(), std::greater<>());

  const size_t m = negatives.size();
  const double clamped = std::max(0.0, target_fpr);
  size_t k = static_cast<size_t>(std::floor(clamped * static_cast<double>(m) + 1e-12));

  ThresholdResult out;
  if (k >= m) {
    out.threshold = -std::numeric_limits<double>::infinity();
    out.everything_positive = true;
    out.achieved_fpr = 1.0;
    return out;
  }
  out.threshold = negatives[k];
  size_t above = 0;
  for (double s : negatives) {
    if (s > out.threshold) ++above;
  }
  out.achieved_fpr = static_cast<double>(above) / static_cast<double>(m);
  out.degenerate = k == 0 && negatives.front() == negatives.back();
  return out;
}

FluctuationReport fluctuation_analysis(
    const std::function<double(uint64_t)>& aua_for_seed,
    const std::vector<uint64_t>& seeds) {
  if (seeds.size() < 2) throw InputError("fluctuation_analysis: need at least 2 seeds");
  FluctuationReport report;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (uint64_t seed : seeds) {
    const double aua = aua_for_seed(seed);
    report.aua_by_seed.emplace_back(seed, aua);
    lo = std::min(lo, aua);
    hi = std::max(hi, aua);
  }
  report.spread = hi - lo;
  return report;
}

AblationVariant parse_ablation(std::string_view name) {
  if (name == "SCRN" || name == "scrn") return AblationVariant::scrn;
  if (name == "SCRN-SC" || name == "scrn-sc") return AblationVariant::no_sc;
  if (name == "SCRN-R" || name == "scrn-r") return AblationVariant::no_reconstruction;
  if (name == "SCRN-eps" || name == "scrn-eps" || name == "SCRN-ε") {
    return AblationVariant::no_noise;
  }
  if (name == "SCRN-Lreg" || name == "scrn-lreg" || name == "SCRN-L_reg") {
    return AblationVariant::no_reg;
  }
  if (name == "baseline-encoder" || name == "baseline") {
    return AblationVariant::baseline_encoder;
  }
  throw InputError("unknown ablation variant: '" + std::string(name) + "'");
}

std::string ablation_name(AblationVariant v) {
  switch (v) {
    case AblationVariant::scrn: return "SCRN";
    case AblationVariant::no_sc: return "SCRN-SC";
    case AblationVariant::no_reconstruction: return "SCRN-R";
    case AblationVariant::no_noise: return "SCRN-eps";
    case AblationVariant::no_reg: return "SCRN-Lreg";
    case AblationVariant::baseline_encoder: return "baseline-encoder";
  }
  return "?";
}

AblationDeltas build_ablation(AblationVariant variant) {
  AblationDeltas d;
  d.variant = variant;
  switch (variant) {
    case AblationVariant::scrn:
      break;
    case AblationVariant::no_sc:
      d.objective = TrainingObjective::single_branch;
      d.lambda3_override = 0.0;
      break;
    case AblationVariant::no_reconstruction:
      d.flags.reconstruction = false;
      d.flags.dropout_repr = true;
      d.flags.dropout_rate = 0.1;
      break;
    case AblationVariant::no_noise:
      d.force_zero_noise = true;
      break;
    case AblationVariant::no_reg:
      d.beta_override = 0.0;
      break;
    case AblationVariant::baseline_encoder:
      d.objective = TrainingObjective::single_branch;
      d.flags.reconstruction = false;
      d.lambda3_override = 0.0;
      break;
  }
  return d;
}

void apply_ablation(const AblationDeltas& deltas, ModelConfig& model,
                    VariantFlags& flags, LossHyperParams& hp,
                    TrainingObjective& objective) {
  objective = deltas.objective;
  flags = deltas.flags;
  if (deltas.force_zero_noise) model.noise_mode = NoiseMode::zero;
  if (deltas.lambda3_override >= 0.0) hp.lambda3 = deltas.lambda3_override;
  if (deltas.beta_override >= 0.0) hp.beta = deltas.beta_override;
}

namespace {
std::string fmt2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}
}  // namespace

std::vector<ReportRow> report_rows(const std::string& method, const std::string& attack,
                                   const RobustnessReport& report) {
  return {
      {method, attack, direction_name(AttackDirection::ai_to_human), report.ai_to_human},
      {method, attack, direction_name(AttackDirection::human_to_ai), report.human_to_ai},
      {method, attack, "overall", report.overall},
  };
}

std::string robustness_csv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "method,attack,direction,OA,AUA,ASR,ANQ\n";
  for (const ReportRow& r : rows) {
    out << r.method << ',' << r.attack << ',' << r.direction << ','
        << fmt2(r.stats.oa_percent) << ',' << fmt2(r.stats.aua_percent) << ','
        << fmt2(r.stats.asr_percent) << ',' << fmt2(r.stats.anq) << '\n';
  }
  return out.str();
}

std::string robustness_markdown(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "| method | attack | direction | OA | AUA | ASR | ANQ |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const ReportRow& r : rows) {
    out << "| " << r.method << " | " << r.attack << " | " << r.direction << " | "
        << fmt2(r.stats.oa_percent) << " | " << fmt2(r.stats.aua_percent) << " | "
        << fmt2(r.stats.asr_percent) << " | " << fmt2(r.stats.anq) << " |\n";
  }
  return out.str();
}

std::string classification_csv(const std::string& method,
                               const ClassificationReport& r) {
  std::ostringstream out;
  out << "method,P_ai,R_ai,P_human,R_human,micro_F1\n";
  out << method << ',' << fmt2(r.precision_ai) << ',' << fmt2(r.recall_ai) << ','
      << fmt2(r.precision_human) << ',' << fmt2(r.recall_human) << ','
      << fmt2(r.micro_f1) << '\n';
  return out.str();
}

std::string classification_markdown(const std::string& method,
                                    const ClassificationReport& r) {
  std::ostringstream out;
  out << "| method | P.(AI) | R.(AI) | P.(H.) | R.(H.) | F.(Overall) |\n";
  out << "|---|---|---|---|---|---|\n";
  out << "| " << method << " | " << fmt2(r.precision_ai) << " | " << fmt2(r.recall_ai)
      << " | " << fmt2(r.precision_human) << " | " << fmt2(r.recall_human) << " | "
      << fmt2(r.micro_f1) << " |\n";
  return out.str();
}

}  // namespace scrn
