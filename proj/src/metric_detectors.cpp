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

#include "scrn/metric_detectors.hpp"

#include <cmath>
#include <ostream>

namespace scrn {

std::vector<TokenScore> score_tokens(const ScoringLM& lm, const TokenizedText& text) {
  text.validate();
  if (text.length() < 2) {
    throw InputError("score_tokens: need at least two tokens (the first is unscored)");
  }
  const size_t V = lm.vocab_size();
  std::vector<TokenScore> out;
  out.reserve(text.length() - 1);
  for (size_t i = 1; i < text.length(); ++i) {
    std::vector<double> dist;
    try {
      dist = lm.next_token_distribution(
          std::span<const int>(text.tokens.data(), i));
    } catch (const std::exception& e) {
      throw TransportError("scoring LM failed at position " + std::to_string(i) +
                           ": " + e.what());
    }
    if (dist.size() != V) {
      throw TransportError("scoring LM returned a distribution of wrong size at position " +
                           std::to_string(i));
    }
    double sum = 0.0;
    for (double p : dist) sum += p;
    if (std::abs(sum - 1.0) > 1e-6) {
      throw TransportError("scoring LM distribution does not sum to 1 at position " +
                           std::to_string(i));
    }
    const int realized = text.tokens[i];
    if (realized < 0 || static_cast<size_t>(realized) >= V) {
      throw InputError("score_tokens: token id outside the scoring vocabulary");
    }
    TokenScore s;
    const double p_r = dist[realized];
    s.log_prob = std::log(std::max(p_r, 1e-12));
    size_t rank = 1;
    for (size_t j = 0; j < V; ++j) {
      if (dist[j] > p_r) ++rank;
      else if (dist[j] == p_r && j < static_cast<size_t>(realized)) ++rank;
    }
    s.rank = rank;
    double ent = 0.0;
    for (double p : dist) {
      if (p > 0.0) ent -= p * std::log(p);
    }
    s.entropy = ent;
    out.push_back(s);
  }
  return out;
}

FeatureVector extract_features(const std::vector<TokenScore>& scores) {
  if (scores.empty()) throw InputError("extract_features: no scores");
  FeatureVector f;
  for (const TokenScore& s : scores) {
    f.log_likelihood += s.log_prob;
    f.log_rank += std::log(static_cast<double>(s.rank));
    f.entropy += s.entropy;
    if (s.rank <= 10) ++f.gltr_buckets[0];
    else if (s.rank <= 100) ++f.gltr_buckets[1];
    else if (s.rank <= 1000) ++f.gltr_buckets[2];
    else ++f.gltr_buckets[3];
  }
  const double n = static_cast<double>(scores.size());
  f.log_likelihood /= n;
  f.log_rank /= n;
  f.entropy /= n;
  return f;
}

DetectorFeature parse_detector_feature(std::string_view s) {
  if (s == "log-likelihood") return DetectorFeature::log_likelihood;
  if (s == "log-rank") return DetectorFeature::log_rank;
  if (s == "entropy") return DetectorFeature::entropy;
  if (s == "gltr") return DetectorFeature::gltr;
  if (s == "all") return DetectorFeature::all;
  throw ConfigError("unknown detector feature: '" + std::string(s) + "'");
}

std::string detector_feature_name(DetectorFeature f) {
  switch (f) {
    case DetectorFeature::log_likelihood: return "log-likelihood";
    case DetectorFeature::log_rank: return "log-rank";
    case DetectorFeature::entropy: return "entropy";
    case DetectorFeature::gltr: return "gltr";
    case DetectorFeature::all: return "all";
  }
  return "?";
}

std::vector<double> feature_columns(const FeatureVector& f, DetectorFeature which) {
  const double n = std::max<double>(1.0, static_cast<double>(f.scored_tokens()));
  std::vector<double> gltr;
  for (size_t b : f.gltr_buckets) gltr.push_back(static_cast<double>(b));
  for (size_t b : f.gltr_buckets) gltr.push_back(static_cast<double>(b) / n);
  switch (which) {
    case DetectorFeature::log_likelihood: return {f.log_likelihood};
    case DetectorFeature::log_rank: return {f.log_rank};
    case DetectorFeature::entropy: return {f.entropy};
    case DetectorFeature::gltr: return gltr;
    case DetectorFeature::all: {
      std::vector<double> all{f.log_likelihood, f.log_rank, f.entropy};
      all.insert(all.end(), gltr.begin(), gltr.end());
      return all;
    }
  }
  throw ConfigError("unreachable feature selector");
}

namespace {
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

FeatureClassifier FeatureClassifier::fit(const std::vector<std::vector<double>>& rows,
                                         const std::vector<Label>& labels,
                                         FitOptions options) {
  if (rows.empty() || rows.size() != labels.size()) {
    throw InputError("FeatureClassifier::fit: rows/labels mismatch");
  }
  bool has_pos = false, has_neg = false;
  for (Label l : labels) (l == Label::ai ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw InputError("FeatureClassifier::fit: both classes must be present");
  }
  const size_t dim = rows[0].size();
  for (const auto& r : rows) {
    if (r.size() != dim) throw InputError("FeatureClassifier::fit: ragged feature rows");
  }

  FeatureClassifier c;
  c.mean_.assign(dim, 0.0);
  c.std_.assign(dim, 0.0);
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (size_t j = 0; j < dim; ++j) c.mean_[j] += r[j];
  for (size_t j = 0; j < dim; ++j) c.mean_[j] /= n;
  for (const auto& r : rows)
    for (size_t j = 0; j < dim; ++j) {
      const double d = r[j] - c.mean_[j];
      c.std_[j] += d * d;
    }
  for (size_t j = 0; j < dim; ++j) c.std_[j] = std::max(std::sqrt(c.std_[j] / n), 1e-12);

  std::vector<std::vector<double>> X(rows.size(), std::vector<double>(dim));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < dim; ++j) X[i][j] = (rows[i][j] - c.mean_[j]) / c.std_[j];

  c.w_.assign(dim, 0.0);
  c.b_ = 0.0;
  std::vector<double> gw(dim);
  for (size_t it = 0; it < options.iterations; ++it) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (size_t i = 0; i < X.size(); ++i) {
      double z = c.b_;
      for (size_t j = 0; j < dim; ++j) z += c.w_[j] * X[i][j];
      const double err = sigmoid(z) - (labels[i] == Label::ai ? 1.0 : 0.0);
      for (size_t j = 0; j < dim; ++j) gw[j] += err * X[i][j];
      gb += err;
    }
    for (size_t j = 0; j < dim; ++j) {
      c.w_[j] -= options.lr * (gw[j] / n + options.l2 * c.w_[j]);
    }
    c.b_ -= options.lr * gb / n;
  }
  return c;
}

double FeatureClassifier::score(const std::vector<double>& row) const {
  if (row.size() != w_.size()) {
    throw InputError("FeatureClassifier::score: wrong feature dimension");
  }
  double z = b_;
  for (size_t j = 0; j < row.size(); ++j) {
    z += w_[j] * (row[j] - mean_[j]) / std_[j];
  }
  return sigmoid(z);
}

Label FeatureClassifier::predict(const std::vector<double>& row, double threshold) const {
  return score(row) > threshold ? Label::ai : Label::human;
}

FeatureClassifier FeatureClassifier::from_state(std::vector<double> mean,
                                                std::vector<double> std,
                                                std::vector<double> w, double b) {
  if (mean.size() != std.size() || mean.size() != w.size()) {
    throw InputError("FeatureClassifier::from_state: size mismatch");
  }
  FeatureClassifier c;
  c.mean_ = std::move(mean);
  c.std_ = std::move(std);
  c.w_ = std::move(w);
  c.b_ = b;
  return c;
}

MetricDetector::MetricDetector(WordTokenizer tokenizer, BigramLM lm,
                               FeatureClassifier clf, DetectorFeature feature,
                               double threshold)
    : tokenizer_(std::move(tokenizer)),
      lm_(std::move(lm)),
      clf_(std::move(clf)),
      feature_(feature),
      threshold_(threshold) {}

MetricDetector MetricDetector::train(const std::vector<std::string>& texts,
                                     const std::vector<Label>& labels,
                                     DetectorFeature feature, double smoothing,
                                     FeatureClassifier::FitOptions options) {
  if (texts.size() != labels.size() || texts.empty()) {
    throw InputError("MetricDetector::train: texts/labels mismatch");
  }
  WordTokenizer tok = WordTokenizer::fit(texts);
  BigramLM lm(tok.vocab().size(), smoothing);
  std::vector<std::vector<int>> seqs;
  seqs.reserve(texts.size());
  for (size_t i = 0; i < texts.size(); ++i) {
    seqs.push_back(tok.encode(texts[i], labels[i]).tokens);
  }
  lm.fit(seqs);

  std::vector<std::vector<double>> rows;
  rows.reserve(texts.size());
  for (size_t i = 0; i < texts.size(); ++i) {
    TokenizedText t = tok.encode(texts[i], labels[i]);
    rows.push_back(feature_columns(extract_features(score_tokens(lm, t)), feature));
  }
  FeatureClassifier clf = FeatureClassifier::fit(rows, labels, options);
  return MetricDetector(std::move(tok), std::move(lm), std::move(clf), feature);
}

FeatureVector MetricDetector::features(const std::string& text) const {
  // Label is irrelevant for scoring; features must not depend on it.
  TokenizedText t = tokenizer_.encode(text, Label::human);
  return extract_features(score_tokens(lm_, t));
}

double MetricDetector::score(const std::string& text) const {
  return clf_.score(feature_columns(features(text), feature_));
}

std::pair<std::array<double, 2>, Label> MetricDetector::predict(
    const std::string& text) const {
  const double p_ai = score(text);
  std::array<double, 2> dist{1.0 - p_ai, p_ai};
  return {dist, p_ai > threshold_ ? Label::ai : Label::human};
}

void write_feature_csv(std::ostream& out, const std::vector<std::string>& text_ids,
                       const std::vector<Label>& labels,
                       const std::vector<FeatureVector>& features) {
  if (text_ids.size() != labels.size() || text_ids.size() != features.size()) {
    throw InputError("write_feature_csv: column length mismatch");
  }
  out << "text_id,label,log_likelihood,log_rank,entropy,gltr1,gltr2,gltr3,gltr4\n";
  char buf[64];
  for (size_t i = 0; i < text_ids.size(); ++i) {
    const FeatureVector& f = features[i];
    out << text_ids[i] << ',' << label_name(labels[i]);
    for (double v : {f.log_likelihood, f.log_rank, f.entropy}) {
      std::snprintf(buf, sizeof(buf), ",%.9g", v);
      out << buf;
    }
    for (size_t b : f.gltr_buckets) out << ',' << b;
    out << '\n';
  }
}

}  // namespace scrn
