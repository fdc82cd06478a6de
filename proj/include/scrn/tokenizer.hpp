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

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "scrn/common.hpp"

namespace scrn {

// A token sequence with its binary label: the unit every stage consumes.
struct TokenizedText {
  std::vector<int> tokens;
  std::vector<uint8_t> attention_mask;  // 1 = real position
  Label label = Label::human;
  std::string source_tag;

  size_t length() const { return tokens.size(); }
  size_t unmasked_count() const;
  // Enforces: mask length equals token length, at least one unmasked position.
  void validate() const;
};

// Word-level vocabulary with fixed special tokens. Ids are assigned in
// first-seen order over the fitting corpus, so a given corpus + ordering
// always produces the same table.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  Vocabulary();

  int add(const std::string& word);          // idempotent
  int lookup(const std::string& word) const; // kUnk when absent
  const std::string& word(int id) const;
  size_t size() const { return words_.size(); }

  std::vector<std::string> words() const { return words_; }
  static Vocabulary from_words(const std::vector<std::string>& words);

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> words_;
};

// Splits surface text into word tokens: maximal runs of non-separator
// characters, with punctuation emitted as standalone tokens. This is the
// same segmentation the attacks use, so victim tokenization and attack
// word indexing agree on what a "word" is.
std::vector<std::string> split_tokens(const std::string& text);

class WordTokenizer {
 public:
  explicit WordTokenizer(Vocabulary vocab) : vocab_(std::move(vocab)) {}

  // Builds a vocabulary over the given texts (plus specials).
  static WordTokenizer fit(const std::vector<std::string>& texts);

  // [BOS] w1 ... wn [EOS]; unknown words map to [UNK]; full mask.
  TokenizedText encode(const std::string& text, Label label,
                       std::string source_tag = {}) const;

  const Vocabulary& vocab() const { return vocab_; }

 private:
  Vocabulary vocab_;
};

}  // namespace scrn
