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
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "scrn/common.hpp"

namespace scrn {

struct Prediction {
  std::array<double, 2> distribution{};  // [p_human, p_ai]
  Label label = Label::human;

  double prob_of(Label l) const { return distribution[label_index(l)]; }
};

// Black-box classifier under attack. predict must be side-effect-free and,
// for reproducible campaigns, a pure function of the text.
class Victim {
 public:
  virtual ~Victim() = default;
  virtual Prediction predict(const std::string& text) const = 0;
};

enum class EditKind {
  synonym_substitute,
  char_substitute,
  char_delete,
  char_insert,
  char_swap,
  word_delete,
  word_insert,
};

std::string edit_kind_name(EditKind k);
EditKind parse_edit_kind(std::string_view s);

// One surface edit. `position` is the word index in the text state the edit
// is applied to (edits are applied sequentially in list order). For word
// rewrites `original` must match the word at that position; for word_insert
// `original` is empty; for word_delete `replacement` is empty.
struct Transformation {
  EditKind kind = EditKind::synonym_substitute;
  size_t position = 0;
  std::string original;
  std::string replacement;

  void validate() const;
};

enum class AttackDirection { ai_to_human, human_to_ai };

inline AttackDirection direction_of(Label true_label) {
  return true_label == Label::ai ? AttackDirection::ai_to_human
                                 : AttackDirection::human_to_ai;
}
std::string direction_name(AttackDirection d);

struct AttackResult {
  std::string original_text;
  std::string perturbed_text;
  Label true_label = Label::human;
  Label original_prediction = Label::human;
  Label final_prediction = Label::human;
  std::array<double, 2> original_distribution{};
  std::array<double, 2> final_distribution{};
  bool success = false;
  bool skipped = false;  // original prediction already wrong; never attacked
  size_t queries = 0;
  std::vector<Transformation> edits;

  AttackDirection direction() const { return direction_of(true_label); }
  // success <=> originally correct and finally wrong; queries >= 1;
  // replaying edits reproduces perturbed_text byte for byte.
  void validate() const;
};

struct AttackBudget {
  double max_fraction_perturbed = 0.3;  // edit cap = ceil(fraction * words)
  size_t max_queries = 500;
  size_t candidate_cap = 50;

  void validate() const;
};

// Word eligibility shared by the attacks: stopwords and short words are
// never touched (configurable).
struct WordFilter {
  size_t min_word_len = 3;
  bool attack_stopwords = false;

  bool eligible(const std::string& word) const;
};

const std::unordered_set<std::string>& default_stopwords();

struct AttackConfig {
  AttackBudget budget;
  WordFilter filter;
  size_t pruthi_max_words = 3;
  uint64_t seed = 0;  // drives the randomized candidate generators

  void validate() const;
};

// Text split into words and the separators around them;
// assemble() restores the exact original string.
struct SegmentedText {
  std::vector<std::string> words;
  std::vector<std::string> seps;  // seps.size() == words.size() + 1

  static SegmentedText parse(const std::string& text);
  std::string assemble() const;
  std::string with_word(size_t index, const std::string& replacement) const;
};

// Applies edits left to right; each edit addresses the current text state.
// The empty edit list is the identity.
std::string apply_edits(const std::string& text, const std::vector<Transformation>& edits);

// Query accounting around a victim: one counted call per distinct text,
// repeated texts come from the session cache. try_predict returns nullopt
// once the query cap would be exceeded.
class AttackSession {
 public:
  AttackSession(const Victim& victim, size_t max_queries);

  std::optional<Prediction> try_predict(const std::string& text);
  size_t queries() const { return queries_; }
  bool exhausted() const { return exhausted_; }

 private:
  const Victim& victim_;
  size_t max_queries_;
  size_t queries_ = 0;
  bool exhausted_ = false;
  std::unordered_map<std::string, Prediction> memo_;
};

// Synonym source for the substitution attack. Implementations must not
// return the queried word itself.
class Thesaurus {
 public:
  virtual ~Thesaurus() = default;
  virtual std::vector<std::string> synonyms(const std::string& word) const = 0;
};

// Fixed synonym groups; every member maps to the other members of its group.
class StaticThesaurus : public Thesaurus {
 public:
  explicit StaticThesaurus(const std::vector<std::vector<std::string>>& groups);
  std::vector<std::string> synonyms(const std::string& word) const override;

 private:
  std::unordered_map<std::string, std::vector<std::string>> table_;
};

// QWERTY neighborhood used by the typo attack ('a' -> q,w,s,z and so on).
const std::vector<char>& keyboard_neighbors(char c);

struct AttackCandidate {
  std::string word;
  EditKind kind = EditKind::char_substitute;
};

// Candidate generators behind the two character-level attacks. Randomized
// choices (replacement letters, cap subsampling) draw from `rng`, so a
// seeded generator makes them reproducible.
std::vector<AttackCandidate> dwb_candidate_words(const std::string& word, Rng& rng,
                                                 size_t cap);
std::vector<AttackCandidate> pruthi_candidate_words(const std::string& word, Rng& rng,
                                                    size_t cap);

// S(w_i) = P(true|x) - P(true|x with w_i masked by "[UNK]"). Scores every
// word: exactly words.size() + 1 victim queries on a fresh session.
std::vector<double> word_saliency(AttackSession& session, const SegmentedText& seg,
                                  Label true_label);

// Greedy synonym-substitution attack driven by word saliency and best-swap
// probability drop.
AttackResult pwws_attack(const Victim& victim, const std::string& text,
                         Label true_label, const AttackConfig& config,
                         const Thesaurus& thesaurus);

// Character-edit attack: leave-one-out word ranking, then the best of
// {substitute, swap, delete, insert} per word, at most two edits per word.
AttackResult deepwordbug_attack(const Victim& victim, const std::string& text,
                                Label true_label, const AttackConfig& config);

// Typo attack: keyboard-adjacent substitutions, drops, adds and adjacent
// swaps on at most `pruthi_max_words` words, one edit per word.
AttackResult pruthi_attack(const Victim& victim, const std::string& text,
                           Label true_label, const AttackConfig& config);

}  // namespace scrn
