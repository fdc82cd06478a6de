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

#include <span>
#include <unordered_map>
#include <vector>

#include "scrn/common.hpp"

namespace scrn {

// A causal language model used only for scoring: given a prefix it returns
// the full next-token distribution. The metric-based detectors are generic
// over this interface; any model can be injected.
class ScoringLM {
 public:
  virtual ~ScoringLM() = default;
  virtual size_t vocab_size() const = 0;
  // Must sum to 1 within 1e-6; prefix is nonempty.
  virtual std::vector<double> next_token_distribution(
      std::span<const int> prefix) const = 0;
  // Whether one instance may be queried from several workers at once.
  // Implementations that keep per-call mutable state must return false and
  // be instantiated once per worker.
  virtual bool shareable() const = 0;
};

// Bundled desk-scale scoring model: bigram counts with add-k smoothing.
// Immutable after fit, hence shareable.
class BigramLM : public ScoringLM {
 public:
  explicit BigramLM(size_t vocab_size, double smoothing = 1.0);

  void fit(const std::vector<std::vector<int>>& sequences);

  size_t vocab_size() const override { return vocab_; }
  std::vector<double> next_token_distribution(std::span<const int> prefix) const override;
  bool shareable() const override { return true; }

  double smoothing() const { return k_; }
  const std::vector<std::unordered_map<int, double>>& rows() const { return counts_; }
  void set_count(int prev, int next, double count);

 private:
  size_t vocab_;
  double k_;
  std::vector<std::unordered_map<int, double>> counts_;
  std::vector<double> row_totals_;
};

}  // namespace scrn
