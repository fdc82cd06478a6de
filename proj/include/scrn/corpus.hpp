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

#include <filesystem>

#include "scrn/attacks.hpp"
#include "scrn/common.hpp"

namespace scrn {

enum class Split { train, test, attack };

std::string split_name(Split s);
Split parse_split(std::string_view s);

struct CorpusRecord {
  std::string text;
  Label label = Label::human;
  std::string source_tag;
  Split split = Split::train;
};

struct Corpus {
  std::vector<CorpusRecord> records;
  std::string dataset_name;
  uint64_t checksum = 0;

  size_t count(Split s) const;
  size_t count(Split s, Label l) const;
  std::vector<size_t> indices(Split s) const;
  // Attack records remain part of the test distribution.
  std::vector<size_t> test_indices_including_attack() const;

  // Text-hash disjointness between train and the rest.
  void assert_no_leakage() const;
  void recompute_checksum();
};

// Split sizes for a total count: the test share is floor((1-f) * total).
std::pair<size_t, size_t> train_test_sizes(size_t total, double train_fraction);

// Formats: jsonl-v1 (one object per line: text, label, optional source and
// split), hc3-raw (question/human_answers/chatgpt_answers lines),
// ghostbuster-dir (directory tree with human/ and gpt/ leaves of .txt
// files), seqxgpt-raw (text plus generator-name label). Unless records
// carry explicit splits, a deterministic shuffle with `data_seed` assigns
// train/test by `train_fraction`.
Corpus load_corpus(const std::filesystem::path& path, const std::string& format_id,
                   uint64_t data_seed, double train_fraction = 0.9);

// jsonl-v1 with the split column; loading the result reproduces the corpus.
void save_corpus_jsonl(const std::filesystem::path& path, const Corpus& corpus);

// Draws exactly n_per_class records per class from the test split (without
// replacement) and marks them as the attack set.
void sample_attack_set(Corpus& corpus, size_t n_per_class, uint64_t seed);

// Deterministic two-family benchmark corpus. One family writes in a rigid
// report-like register, the other in a loose conversational one; the
// bundled thesaurus groups bridge the two vocabularies so substitution
// attacks have real ammunition in both directions.
Corpus synthetic_corpus(size_t n_train, size_t n_test, uint64_t seed);

// Synonym groups covering the synthetic vocabulary.
const std::vector<std::vector<std::string>>& synthetic_synonym_groups();
StaticThesaurus synthetic_thesaurus();

// One synonym group per line, words separated by whitespace.
StaticThesaurus load_thesaurus(const std::filesystem::path& path);

}  // namespace scrn
