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

#include <array>
#include <iosfwd>

#include "scrn/scoring_lm.hpp"
#include "scrn/tokenizer.hpp"

namespace scrn {

// Per-position statistics of the realized token under the scoring model.
struct TokenScore {
  double log_prob = 0.0;  // natural log, <= 0
  size_t rank = 1;        // 1-based; ties broken toward lower token ids
  double entropy = 0.0;   // nats, in [0, ln |V|]
};

struct FeatureVector {
  double log_likelihood = 0.0;            // mean log_prob
  double log_rank = 0.0;                  // mean ln(rank)
  double entropy = 0.0;                   // mean entropy
  std::array<size_t, 4> gltr_buckets{};   // ranks 1-10, 11-100, 101-1000, >1000

  size_t scored_tokens() const {
    return gltr_buckets[0] + gltr_buckets[1] + gltr_buckets[2] + gltr_buckets[3];
  }
};

// Scores positions 1..n-1; the first token has no conditioning prefix and
// is skipped. LM failures surface as TransportError carrying the position.
std::vector<TokenScore> score_tokens(const ScoringLM& lm, const TokenizedText& text);

FeatureVector extract_features(const std::vector<TokenScore>& scores);

// Which statistic a detector feeds its classifier.
enum class DetectorFeature { log_likelihood, log_rank, entropy, gltr, all };

DetectorFeature parse_detector_feature(std::string_view s);
std::string detector_feature_name(DetectorFeature f);

// Classifier input columns for one feature choice. The GLTR buckets are
// used both raw and normalized by scored-token count.
std::vector<double> feature_columns(const FeatureVector& f, DetectorFeature which);

// Logistic regression over standardized feature columns, fit by full-batch
// gradient descent on the mean log loss (so duplicating every sample leaves
// the fit unchanged). Deterministic: zero init, fixed iteration count.
class FeatureClassifier {
 public:
  struct FitOptions {
    double lr = 0.5;
    size_t iterations = 1000;
    double l2 = 1e-6;
  };

  static FeatureClassifier fit(const std::vector<std::vector<double>>& rows,
                               const std::vector<Label>& labels, FitOptions options);
  static FeatureClassifier fit(const std::vector<std::vector<double>>& rows,
                               const std::vector<Label>& labels) {
    return fit(rows, labels, FitOptions());
  }

  // P(ai) in [0, 1].
  double score(const std::vector<double>& row) const;
  Label predict(const std::vector<double>& row, double threshold = 0.5) const;

  const std::vector<double>& weights() const { return w_; }
  double bias() const { return b_; }
  const std::vector<double>& feature_means() const { return mean_; }
  const std::vector<double>& feature_stds() const { return std_; }

  static FeatureClassifier from_state(std::vector<double> mean, std::vector<double> std,
                                      std::vector<double> w, double b);

 private:
  FeatureClassifier() = default;
  std::vector<double> mean_, std_, w_;
  double b_ = 0.0;
};

// A full metric-based detector: tokenizer + scoring LM + feature classifier.
class MetricDetector {
 public:
  MetricDetector(WordTokenizer tokenizer, BigramLM lm, FeatureClassifier clf,
                 DetectorFeature feature, double threshold = 0.5);

  // Fits the bundled bigram LM and the classifier on labeled raw texts.
  static MetricDetector train(const std::vector<std::string>& texts,
                              const std::vector<Label>& labels,
                              DetectorFeature feature, double smoothing = 1.0,
                              FeatureClassifier::FitOptions options =
                                  FeatureClassifier::FitOptions());

  double score(const std::string& text) const;  // P(ai)
  std::pair<std::array<double, 2>, Label> predict(const std::string& text) const;
  FeatureVector features(const std::string& text) const;

  void set_threshold(double t) { threshold_ = t; }
  double threshold() const { return threshold_; }
  DetectorFeature feature() const { return feature_; }
  const WordTokenizer& tokenizer() const { return tokenizer_; }
  const BigramLM& lm() const { return lm_; }
  const FeatureClassifier& classifier() const { return clf_; }

 private:
  WordTokenizer tokenizer_;
  BigramLM lm_;
  FeatureClassifier clf_;
  DetectorFeature feature_;
  double threshold_;
};

// Feature dump: text_id,label,log_likelihood,log_rank,entropy,gltr1..4
void write_feature_csv(std::ostream& out, const std::vector<std::string>& text_ids,
                       const std::vector<Label>& labels,
                       const std::vector<FeatureVector>& features);

}  // namespace scrn
