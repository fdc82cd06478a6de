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

#include "scrn/tokenizer.hpp"

#include <cctype>

namespace scrn {

size_t TokenizedText::unmasked_count() const {
  size_t n = 0;
  for (uint8_t m : attention_mask) n += m ? 1 : 0;
  return n;
}

void TokenizedText::validate() const {
  if (tokens.empty()) throw InputError("TokenizedText: empty token sequence");
  if (attention_mask.size() != tokens.size()) {
    throw InputError("TokenizedText: mask length does not match token length");
  }
  if (unmasked_count() == 0) throw InputError("TokenizedText: all positions masked");
}

Vocabulary::Vocabulary() {
  for (const char* s : {"[PAD]", "[UNK]", "[BOS]", "[EOS]"}) add(s);
}

int Vocabulary::add(const std::string& word) {
  auto it = index_.find(word);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(words_.size());
  index_.emplace(word, id);
  words_.push_back(word);
  return id;
}

int Vocabulary::lookup(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= words_.size()) {
    throw InputError("Vocabulary: id out of range");
  }
  return words_[id];
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words) {
  Vocabulary v;
  if (words.size() < 4 || words[0] != "[PAD]" || words[1] != "[UNK]" ||
      words[2] != "[BOS]" || words[3] != "[EOS]") {
    throw InputError("Vocabulary: word list must start with the special tokens");
  }
  for (size_t i = 4; i < words.size(); ++i) v.add(words[i]);
  return v;
}

namespace {
bool is_separator(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}
bool is_punct_token(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '"': case '(': case ')': case '[': case ']':
      return true;
    default:
      return false;
  }
}
}  // namespace

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (size_t i = 0; i < text.size(); ++i) {
    // The reserved unknown-word marker stays intact so masked-word queries
    // reach the model as a single token.
    if (text.compare(i, 5, "[UNK]") == 0) {
      if (!cur.empty()) { out.push_back(cur); cur.clear(); }
      out.push_back("[UNK]");
      i += 4;
      continue;
    }
    const char c = text[i];
    if (is_separator(c)) {
      if (!cur.empty()) { out.push_back(cur); cur.clear(); }
    } else if (is_punct_token(c)) {
      if (!cur.empty()) { out.push_back(cur); cur.clear(); }
      out.push_back(std::string(1, c));
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

WordTokenizer WordTokenizer::fit(const std::vector<std::string>& texts) {
  Vocabulary vocab;
  for (const auto& t : texts) {
    for (const auto& w : split_tokens(t)) vocab.add(w);
  }
  return WordTokenizer(std::move(vocab));
}

TokenizedText WordTokenizer::encode(const std::string& text, Label label,
                                    std::string source_tag) const {
  TokenizedText out;
  out.tokens.push_back(Vocabulary::kBos);
  for (const auto& w : split_tokens(text)) out.tokens.push_back(vocab_.lookup(w));
  out.tokens.push_back(Vocabulary::kEos);
  out.attention_mask.assign(out.tokens.size(), 1);
  out.label = label;
  out.source_tag = std::move(source_tag);
  return out;
}

}  // namespace scrn
