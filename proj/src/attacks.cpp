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

#include "scrn/attacks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace scrn {

std::string edit_kind_name(EditKind k) {
  switch (k) {
    case EditKind::synonym_substitute: return "synonym-substitute";
    case EditKind::char_substitute: return "char-substitute";
    case EditKind::char_delete: return "char-delete";
    case EditKind::char_insert: return "char-insert";
    case EditKind::char_swap: return "char-swap";
    case EditKind::word_delete: return "word-delete";
    case EditKind::word_insert: return "word-insert";
  }
  return "?";
}

EditKind parse_edit_kind(std::string_view s) {
  for (EditKind k : {EditKind::synonym_substitute, EditKind::char_substitute,
                     EditKind::char_delete, EditKind::char_insert, EditKind::char_swap,
                     EditKind::word_delete, EditKind::word_insert}) {
    if (edit_kind_name(k) == s) return k;
  }
  throw InputError("unknown edit kind: '" + std::string(s) + "'");
}

std::string direction_name(AttackDirection d) {
  return d == AttackDirection::ai_to_human ? "ai_to_human" : "human_to_ai";
}

void Transformation::validate() const {
  if (replacement == original) {
    throw InputError("Transformation: replacement equals original");
  }
  if (kind == EditKind::word_insert && !original.empty()) {
    throw InputError("Transformation: word_insert must have empty original");
  }
  if (kind == EditKind::word_delete && !replacement.empty()) {
    throw InputError("Transformation: word_delete must have empty replacement");
  }
}

void AttackResult::validate() const {
  const bool expect_success =
      original_prediction == true_label && final_prediction != true_label;
  if (success != expect_success) {
    throw InputError("AttackResult: success flag contradicts predictions");
  }
  if (queries < 1) throw InputError("AttackResult: queries must be >= 1");
  if (apply_edits(original_text, edits) != perturbed_text) {
    throw InputError("AttackResult: edits do not reproduce perturbed_text");
  }
}

void AttackBudget::validate() const {
  if (!(max_fraction_perturbed > 0.0) || max_fraction_perturbed > 1.0) {
    throw ConfigError("attack.max_fraction must be in (0, 1]");
  }
  if (max_queries < 1) throw ConfigError("attack.max_queries must be >= 1");
  if (candidate_cap < 1) throw ConfigError("attack.candidate_cap must be >= 1");
}

void AttackConfig::validate() const { budget.validate(); }

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> kStopwords{
      "a",    "an",   "and",  "are",   "as",    "at",   "be",   "but", "by",
      "for",  "from", "had",  "has",   "have",  "he",   "her",  "his", "if",
      "in",   "is",   "it",   "its",   "of",    "on",   "or",   "she", "so",
      "that", "the",  "their", "then", "there", "they", "this", "to",
      "was",  "were", "will", "with",  "you"};
  return kStopwords;
}

bool WordFilter::eligible(const std::string& word) const {
  if (word.size() < min_word_len) return false;
  if (!attack_stopwords) {
    std::string lower = word;
    for (char& c : lower) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (default_stopwords().count(lower) > 0) return false;
  }
  return true;
}

namespace {

bool is_word_char(char c) {
  const unsigned char u = static_cast<unsigned char>(c);
  if (std::isspace(u)) return false;
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '"': case '(': case ')': case '[': case ']':
      return false;
    default:
      return true;
  }
}

}  // namespace

SegmentedText SegmentedText::parse(const std::string& text) {
  SegmentedText out;
  std::string sep, word;
  for (char c : text) {
    if (is_word_char(c)) {
      if (word.empty()) {
        out.seps.push_back(sep);
        sep.clear();
      }
      word.push_back(c);
    } else {
      if (!word.empty()) {
        out.words.push_back(word);
        word.clear();
      }
      sep.push_back(c);
    }
  }
  if (!word.empty()) out.words.push_back(word);
  out.seps.push_back(sep);
  return out;
}

std::string SegmentedText::assemble() const {
  std::string out = seps[0];
  for (size_t i = 0; i < words.size(); ++i) {
    out += words[i];
    out += seps[i + 1];
  }
  return out;
}

std::string SegmentedText::with_word(size_t index, const std::string& replacement) const {
  SegmentedText copy = *this;
  copy.words.at(index) = replacement;
  return copy.assemble();
}

namespace {

void erase_word_at(SegmentedText& seg, size_t pos) {
  const size_t last = seg.words.size() - 1;
  seg.words.erase(seg.words.begin() + static_cast<long>(pos));
  if (pos == 0) {
    seg.seps.erase(seg.seps.begin() + 1);  // keep the original prefix
  } else if (pos == last) {
    seg.seps.erase(seg.seps.begin() + static_cast<long>(pos));  // keep the suffix
  } else {
    seg.seps.erase(seg.seps.begin() + static_cast<long>(pos) + 1);
  }
}

void insert_word_at(SegmentedText& seg, size_t pos, const std::string& word) {
  const size_t old_size = seg.words.size();
  seg.words.insert(seg.words.begin() + static_cast<long>(pos), word);
  const size_t sep_at = pos == old_size ? pos : pos + 1;
  seg.seps.insert(seg.seps.begin() + static_cast<long>(sep_at), " ");
}

}  // namespace

std::string apply_edits(const std::string& text,
                        const std::vector<Transformation>& edits) {
  if (edits.empty()) return text;
  SegmentedText seg = SegmentedText::parse(text);
  for (const Transformation& e : edits) {
    e.validate();
    switch (e.kind) {
      case EditKind::word_insert:
        if (e.position > seg.words.size()) {
          throw InputError("apply_edits: insert position out of bounds");
        }
        insert_word_at(seg, e.position, e.replacement);
        break;
      case EditKind::word_delete:
        if (e.position >= seg.words.size()) {
          throw InputError("apply_edits: delete position out of bounds");
        }
        if (seg.words[e.position] != e.original) {
          throw InputError("apply_edits: original word mismatch at position " +
                           std::to_string(e.position));
        }
        erase_word_at(seg, e.position);
        break;
      default:
        if (e.position >= seg.words.size()) {
          throw InputError("apply_edits: position out of bounds");
        }
        if (seg.words[e.position] != e.original) {
          throw InputError("apply_edits: original word mismatch at position " +
                           std::to_string(e.position));
        }
        seg.words[e.position] = e.replacement;
        break;
    }
  }
  return seg.assemble();
}

AttackSession::AttackSession(const Victim& victim, size_t max_queries)
    : victim_(victim), max_queries_(max_queries) {}

std::optional<Prediction> AttackSession::try_predict(const std::string& text) {
  auto it = memo_.find(text);
  if (it != memo_.end()) return it->second;
  if (queries_ >= max_queries_) {
    exhausted_ = true;
    return std::nullopt;
  }
  Prediction p = victim_.predict(text);
  ++queries_;
  memo_.emplace(text, p);
  return p;
}

StaticThesaurus::StaticThesaurus(const std::vector<std::vector<std::string>>& groups) {
  for (const auto& group : groups) {
    for (const auto& word : group) {
      auto& row = table_[word];
      for (const auto& other : group) {
        if (other != word && std::find(row.begin(), row.end(), other) == row.end()) {
          row.push_back(other);
        }
      }
    }
  }
}

std::vector<std::string> StaticThesaurus::synonyms(const std::string& word) const {
  auto it = table_.find(word);
  return it == table_.end() ? std::vector<std::string>{} : it->second;
}

const std::vector<char>& keyboard_neighbors(char c) {
  static const std::unordered_map<char, std::vector<char>> kTable{
      {'q', {'w', 'a', 's'}},
      {'w', {'q', 'e', 'a', 's', 'd'}},
      {'e', {'w', 'r', 's', 'd', 'f'}},
      {'r', {'e', 't', 'd', 'f', 'g'}},
      {'t', {'r', 'y', 'f', 'g', 'h'}},
      {'y', {'t', 'u', 'g', 'h', 'j'}},
      {'u', {'y', 'i', 'h', 'j', 'k'}},
      {'i', {'u', 'o', 'j', 'k', 'l'}},
      {'o', {'i', 'p', 'k', 'l'}},
      {'p', {'o', 'l'}},
      {'a', {'q', 'w', 's', 'z'}},
      {'s', {'q', 'w', 'e', 'a', 'd', 'z', 'x'}},
      {'d', {'w', 'e', 'r', 's', 'f', 'x', 'c'}},
      {'f', {'e', 'r', 't', 'd', 'g', 'c', 'v'}},
      {'g', {'r', 't', 'y', 'f', 'h', 'v', 'b'}},
      {'h', {'t', 'y', 'u', 'g', 'j', 'b', 'n'}},
      {'j', {'y', 'u', 'i', 'h', 'k', 'n', 'm'}},
      {'k', {'u', 'i', 'o', 'j', 'l', 'm'}},
      {'l', {'i', 'o', 'p', 'k'}},
      {'z', {'a', 's', 'x'}},
      {'x', {'z', 's', 'd', 'c'}},
      {'c', {'x', 'd', 'f', 'v'}},
      {'v', {'c', 'f', 'g', 'b'}},
      {'b', {'v', 'g', 'h', 'n'}},
      {'n', {'b', 'h', 'j', 'm'}},
      {'m', {'n', 'j', 'k'}},
  };
  static const std::vector<char> kEmpty;
  auto it = kTable.find(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return it == kTable.end() ? kEmpty : it->second;
}

std::vector<double> word_saliency(AttackSession& session, const SegmentedText& seg,
                                  Label true_label) {
  if (seg.words.empty()) throw InputError("word_saliency: no words");
  std::vector<double> out(seg.words.size(), 0.0);
  const auto base = session.try_predict(seg.assemble());
  if (!base) return out;
  const double p_true = base->prob_of(true_label);
  for (size_t i = 0; i < seg.words.size(); ++i) {
    const auto masked = session.try_predict(seg.with_word(i, "[UNK]"));
    if (!masked) break;  // budget exhausted; remaining scores stay 0
    out[i] = p_true - masked->prob_of(true_label);
  }
  return out;
}

namespace {

AttackResult skipped_result(const std::string& text, Label true_label,
                            const Prediction& p0, size_t queries) {
  AttackResult r;
  r.original_text = text;
  r.perturbed_text = text;
  r.true_label = true_label;
  r.original_prediction = p0.label;
  r.final_prediction = p0.label;
  r.original_distribution = p0.distribution;
  r.final_distribution = p0.distribution;
  r.success = false;
  r.skipped = true;
  r.queries = queries;
  return r;
}

struct GreedyState {
  SegmentedText current;
  Prediction current_pred;
  double p_true;
  std::vector<Transformation> edits;
  bool flipped = false;
};

// Applies one word rewrite if it strictly decreases the true-class
// probability on the current text. Returns false once the budget ran out.
bool try_rewrite(AttackSession& session, GreedyState& st, Label true_label,
                 size_t pos, const AttackCandidate& cand) {
  const std::string text = st.current.with_word(pos, cand.word);
  const auto pred = session.try_predict(text);
  if (!pred) return false;
  const double p = pred->prob_of(true_label);
  if (p < st.p_true) {
    Transformation t;
    t.kind = cand.kind;
    t.position = pos;
    t.original = st.current.words[pos];
    t.replacement = cand.word;
    st.edits.push_back(t);
    st.current.words[pos] = cand.word;
    st.current_pred = *pred;
    st.p_true = p;
    if (pred->label != true_label) st.flipped = true;
  }
  return true;
}

AttackResult finalize(const std::string& text, Label true_label, const Prediction& p0,
                      const GreedyState& st, const AttackSession& session) {
  AttackResult r;
  r.original_text = text;
  r.perturbed_text = apply_edits(text, st.edits);
  r.true_label = true_label;
  r.original_prediction = p0.label;
  r.final_prediction = st.current_pred.label;
  r.original_distribution = p0.distribution;
  r.final_distribution = st.current_pred.distribution;
  r.success = p0.label == true_label && st.current_pred.label != true_label;
  r.skipped = false;
  r.queries = session.queries();
  r.edits = st.edits;
  r.validate();
  return r;
}

// Leave-one-out importance: drop in P(true) when the word is deleted.
std::vector<double> deletion_importance(AttackSession& session, const SegmentedText& seg,
                                        Label true_label, double base_p_true,
                                        const std::vector<size_t>& positions) {
  std::vector<double> imp(seg.words.size(), 0.0);
  for (size_t pos : positions) {
    SegmentedText reduced = seg;
    if (reduced.words.size() == 1) {
      // Deleting the only word would leave no text; mask instead.
      reduced.words[0] = "[UNK]";
    } else {
      erase_word_at(reduced, pos);
    }
    const auto pred = session.try_predict(reduced.assemble());
    if (!pred) break;
    imp[pos] = base_p_true - pred->prob_of(true_label);
  }
  return imp;
}

std::vector<size_t> order_by_score_desc(const std::vector<size_t>& positions,
                                        const std::vector<double>& score) {
  std::vector<size_t> order = positions;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return score[a] > score[b]; });
  return order;
}

void cap_candidates(std::vector<AttackCandidate>& cands, size_t cap, Rng& rng) {
  if (cands.size() <= cap) return;
  rng.shuffle(cands);
  cands.resize(cap);
}

}  // namespace

std::vector<AttackCandidate> dwb_candidate_words(const std::string& word, Rng& rng,
                                                 size_t cap) {
  std::vector<AttackCandidate> out;
  std::unordered_set<std::string> seen{word};
  auto push = [&](std::string w, EditKind k) {
    if (!w.empty() && seen.insert(w).second) out.push_back({std::move(w), k});
  };
  auto random_letter = [&](char avoid) {
    char c;
    do {
      c = static_cast<char>('a' + rng.uniform_index(26));
    } while (c == avoid);
    return c;
  };
  for (size_t p = 0; p < word.size(); ++p) {
    std::string w = word;
    w[p] = random_letter(w[p]);
    push(std::move(w), EditKind::char_substitute);
  }
  for (size_t p = 0; p + 1 < word.size(); ++p) {
    if (word[p] == word[p + 1]) continue;
    std::string w = word;
    std::swap(w[p], w[p + 1]);
    push(std::move(w), EditKind::char_swap);
  }
  if (word.size() >= 2) {
    for (size_t p = 0; p < word.size(); ++p) {
      std::string w = word;
      w.erase(p, 1);
      push(std::move(w), EditKind::char_delete);
    }
  }
  for (size_t p = 0; p <= word.size(); ++p) {
    std::string w = word;
    w.insert(w.begin() + static_cast<long>(p), random_letter('\0'));
    push(std::move(w), EditKind::char_insert);
  }
  cap_candidates(out, cap, rng);
  return out;
}

std::vector<AttackCandidate> pruthi_candidate_words(const std::string& word, Rng& rng,
                                                    size_t cap) {
  std::vector<AttackCandidate> out;
  std::unordered_set<std::string> seen{word};
  auto push = [&](std::string w, EditKind k) {
    if (!w.empty() && seen.insert(w).second) out.push_back({std::move(w), k});
  };
  for (size_t p = 0; p < word.size(); ++p) {
    for (char n : keyboard_neighbors(word[p])) {
      std::string w = word;
      w[p] = n;
      push(std::move(w), EditKind::char_substitute);
    }
  }
  if (word.size() >= 2) {
    for (size_t p = 0; p < word.size(); ++p) {
      std::string w = word;
      w.erase(p, 1);
      push(std::move(w), EditKind::char_delete);
    }
  }
  for (size_t g = 1; g <= word.size(); ++g) {
    for (char n : keyboard_neighbors(word[g - 1])) {
      std::string w = word;
      w.insert(w.begin() + static_cast<long>(g), n);
      push(std::move(w), EditKind::char_insert);
    }
  }
  for (size_t p = 0; p + 1 < word.size(); ++p) {
    if (word[p] == word[p + 1]) continue;
    std::string w = word;
    std::swap(w[p], w[p + 1]);
    push(std::move(w), EditKind::char_swap);
  }
  cap_candidates(out, cap, rng);
  return out;
}

namespace {

std::vector<size_t> eligible_positions(const SegmentedText& seg, const WordFilter& f) {
  std::vector<size_t> out;
  for (size_t i = 0; i < seg.words.size(); ++i) {
    if (f.eligible(seg.words[i])) out.push_back(i);
  }
  return out;
}

}  // namespace

AttackResult pwws_attack(const Victim& victim, const std::string& text,
                         Label true_label, const AttackConfig& config,
                         const Thesaurus& thesaurus) {
  config.validate();
  AttackSession session(victim, config.budget.max_queries);
  const auto base = session.try_predict(text);
  if (!base) throw ConfigError("pwws: query budget does not allow the baseline query");
  if (base->label != true_label) {
    return skipped_result(text, true_label, *base, session.queries());
  }

  const SegmentedText seg = SegmentedText::parse(text);
  GreedyState st{seg, *base, base->prob_of(true_label), {}, false};
  const std::vector<size_t> eligible = eligible_positions(seg, config.filter);
  if (eligible.empty()) return finalize(text, true_label, *base, st, session);

  // Saliency of each eligible word (masked with [UNK]).
  std::vector<double> saliency(seg.words.size(), 0.0);
  for (size_t pos : eligible) {
    const auto masked = session.try_predict(seg.with_word(pos, "[UNK]"));
    if (!masked) return finalize(text, true_label, *base, st, session);
    saliency[pos] = st.p_true - masked->prob_of(true_label);
  }

  // Best synonym per word, evaluated against the original text.
  std::vector<AttackCandidate> best(seg.words.size());
  std::vector<double> best_drop(seg.words.size(), 0.0);
  std::vector<size_t> with_synonyms;
  for (size_t pos : eligible) {
    const auto syns = thesaurus.synonyms(seg.words[pos]);
    if (syns.empty()) continue;
    bool any = false;
    size_t tried = 0;
    for (const std::string& s : syns) {
      if (s == seg.words[pos]) continue;
      if (++tried > config.budget.candidate_cap) break;
      const auto pred = session.try_predict(seg.with_word(pos, s));
      if (!pred) return finalize(text, true_label, *base, st, session);
      const double drop = st.p_true - pred->prob_of(true_label);
      if (!any || drop > best_drop[pos]) {
        best[pos] = AttackCandidate{s, EditKind::synonym_substitute};
        best_drop[pos] = drop;
        any = true;
      }
    }
    if (any) with_synonyms.push_back(pos);
  }
  if (with_synonyms.empty()) return finalize(text, true_label, *base, st, session);

  // Priority: probability drop of the best swap, weighted by the softmax of
  // saliency over the eligible words.
  double max_sal = saliency[eligible[0]];
  for (size_t pos : eligible) max_sal = std::max(max_sal, saliency[pos]);
  double denom = 0.0;
  for (size_t pos : eligible) denom += std::exp(saliency[pos] - max_sal);
  std::vector<double> priority(seg.words.size(), 0.0);
  for (size_t pos : with_synonyms) {
    priority[pos] = best_drop[pos] * (std::exp(saliency[pos] - max_sal) / denom);
  }

  const size_t max_edits = static_cast<size_t>(std::ceil(
      config.budget.max_fraction_perturbed * static_cast<double>(seg.words.size())));
  for (size_t pos : order_by_score_desc(with_synonyms, priority)) {
    if (st.flipped || st.edits.size() >= max_edits) break;
    if (!try_rewrite(session, st, true_label, pos, best[pos])) break;
  }
  return finalize(text, true_label, *base, st, session);
}

AttackResult deepwordbug_attack(const Victim& victim, const std::string& text,
                                Label true_label, const AttackConfig& config) {
  config.validate();
  AttackSession session(victim, config.budget.max_queries);
  const auto base = session.try_predict(text);
  if (!base) {
    throw ConfigError("deepwordbug: query budget does not allow the baseline query");
  }
  if (base->label != true_label) {
    return skipped_result(text, true_label, *base, session.queries());
  }

  const SegmentedText seg = SegmentedText::parse(text);
  GreedyState st{seg, *base, base->prob_of(true_label), {}, false};
  const std::vector<size_t> eligible = eligible_positions(seg, config.filter);
  if (eligible.empty()) return finalize(text, true_label, *base, st, session);

  const std::vector<double> importance =
      deletion_importance(session, seg, true_label, st.p_true, eligible);
  const std::vector<size_t> order = order_by_score_desc(eligible, importance);

  Rng rng(mix_seed(config.seed, fnv1a64(text)));
  std::vector<size_t> edits_per_word(seg.words.size(), 0);
  // Up to two single-character edits per word, spread over two greedy passes.
  for (int pass = 0; pass < 2 && !st.flipped && !session.exhausted(); ++pass) {
    for (size_t pos : order) {
      if (st.flipped || session.exhausted()) break;
      if (edits_per_word[pos] >= 2) continue;
      AttackCandidate chosen;
      double best_p = st.p_true;
      bool found = false;
      for (const AttackCandidate& cand :
           dwb_candidate_words(st.current.words[pos], rng, config.budget.candidate_cap)) {
        const auto pred = session.try_predict(st.current.with_word(pos, cand.word));
        if (!pred) break;
        const double p = pred->prob_of(true_label);
        if (p < best_p) {
          best_p = p;
          chosen = cand;
          found = true;
        }
      }
      if (found && try_rewrite(session, st, true_label, pos, chosen)) {
        if (st.current.words[pos] == chosen.word) ++edits_per_word[pos];
      }
    }
  }
  return finalize(text, true_label, *base, st, session);
}

AttackResult pruthi_attack(const Victim& victim, const std::string& text,
                           Label true_label, const AttackConfig& config) {
  config.validate();
  AttackSession session(victim, config.budget.max_queries);
  const auto base = session.try_predict(text);
  if (!base) throw ConfigError("pruthi: query budget does not allow the baseline query");
  if (base->label != true_label) {
    return skipped_result(text, true_label, *base, session.queries());
  }

  const SegmentedText seg = SegmentedText::parse(text);
  GreedyState st{seg, *base, base->prob_of(true_label), {}, false};
  if (config.pruthi_max_words == 0) {
    return finalize(text, true_label, *base, st, session);
  }
  const std::vector<size_t> eligible = eligible_positions(seg, config.filter);
  if (eligible.empty()) return finalize(text, true_label, *base, st, session);

  const std::vector<double> importance =
      deletion_importance(session, seg, true_label, st.p_true, eligible);

  Rng rng(mix_seed(config.seed, fnv1a64(text)));
  size_t words_edited = 0;
  for (size_t pos : order_by_score_desc(eligible, importance)) {
    if (st.flipped || session.exhausted()) break;
    if (words_edited >= config.pruthi_max_words) break;
    AttackCandidate chosen;
    double best_p = st.p_true;
    bool found = false;
    for (const AttackCandidate& cand :
         pruthi_candidate_words(st.current.words[pos], rng, config.budget.candidate_cap)) {
      const auto pred = session.try_predict(st.current.with_word(pos, cand.word));
      if (!pred) break;
      const double p = pred->prob_of(true_label);
      if (p < best_p) {
        best_p = p;
        chosen = cand;
        found = true;
      }
    }
    if (found && try_rewrite(session, st, true_label, pos, chosen)) {
      if (st.current.words[pos] == chosen.word) ++words_edited;
    }
  }
  return finalize(text, true_label, *base, st, session);
}

}  // namespace scrn
