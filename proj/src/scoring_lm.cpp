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

#include "scrn/scoring_lm.hpp"

namespace scrn {

BigramLM::BigramLM(size_t vocab_size, double smoothing)
    : vocab_(vocab_size), k_(smoothing) {
  if (vocab_ == 0) throw ConfigError("BigramLM: empty vocabulary");
  if (k_ <= 0.0) throw ConfigError("BigramLM: smoothing must be positive");
  counts_.resize(vocab_);
  row_totals_.assign(vocab_, 0.0);
}

void BigramLM::fit(const std::vector<std::vector<int>>& sequences) {
  for (const auto& seq : sequences) {
    for (size_t i = 0; i + 1 < seq.size(); ++i) {
      const int a = seq[i], b = seq[i + 1];
      if (a < 0 || static_cast<size_t>(a) >= vocab_ || b < 0 ||
          static_cast<size_t>(b) >= vocab_) {
        throw InputError("BigramLM::fit: token id outside vocabulary");
      }
      counts_[a][b] += 1.0;
      row_totals_[a] += 1.0;
    }
  }
}

void BigramLM::set_count(int prev, int next, double count) {
  auto& cell = counts_.at(prev)[next];
  row_totals_.at(prev) += count - cell;
  cell = count;
}

std::vector<double> BigramLM::next_token_distribution(std::span<const int> prefix) const {
  if (prefix.empty()) throw InputError("BigramLM: empty prefix");
  const int prev = prefix.back();
  if (prev < 0 || static_cast<size_t>(prev) >= vocab_) {
    throw InputError("BigramLM: prefix token outside vocabulary");
  }
  const double denom = row_totals_[prev] + k_ * static_cast<double>(vocab_);
  std::vector<double> dist(vocab_, k_ / denom);
  for (const auto& [next, c] : counts_[prev]) dist[next] = (c + k_) / denom;
  return dist;
}

}  // namespace scrn
