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

#include "scrn/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

namespace scrn {

using nlohmann::json;

std::string split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::attack: return "attack";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  if (s == "attack") return Split::attack;
  throw InputError("unknown split: '" + std::string(s) + "'");
}

size_t Corpus::count(Split s) const {
  size_t n = 0;
  for (const auto& r : records) n += r.split == s ? 1 : 0;
  return n;
}

size_t Corpus::count(Split s, Label l) const {
  size_t n = 0;
  for (const auto& r : records) n += (r.split == s && r.label == l) ? 1 : 0;
  return n;
}

std::vector<size_t> Corpus::indices(Split s) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == s) out.push_back(i);
  }
  return out;
}

std::vector<size_t> Corpus::test_indices_including_attack() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].split != Split::train) out.push_back(i);
  }
  return out;
}

void Corpus::assert_no_leakage() const {
  std::unordered_set<uint64_t> train_hashes;
  for (const auto& r : records) {
    if (r.split == Split::train) train_hashes.insert(fnv1a64(r.text));
  }
  for (const auto& r : records) {
    if (r.split != Split::train && train_hashes.count(fnv1a64(r.text)) > 0) {
      throw InputError("corpus leakage: a test text also appears in the train split");
    }
  }
}

void Corpus::recompute_checksum() {
  uint64_t h = 1469598103934665603ull;
  for (const auto& r : records) {
    h = mix_seed(h, fnv1a64(r.text));
    h = mix_seed(h, static_cast<uint64_t>(label_index(r.label)));
  }
  checksum = h;
}

std::pair<size_t, size_t> train_test_sizes(size_t total, double train_fraction) {
  if (!(train_fraction > 0.0) || train_fraction >= 1.0) {
    throw ConfigError("train fraction must be in (0, 1)");
  }
  const size_t n_test = static_cast<size_t>(
      std::floor(static_cast<double>(total) * (1.0 - train_fraction) + 1e-9));
  return {total - n_test, n_test};
}

namespace {

void assign_splits(Corpus& corpus, uint64_t data_seed, double train_fraction) {
  const auto [n_train, n_test] = train_test_sizes(corpus.records.size(), train_fraction);
  (void)n_test;
  std::vector<size_t> order(corpus.records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(mix_seed(data_seed, 0x5eed));
  rng.shuffle(order);
  for (size_t k = 0; k < order.size(); ++k) {
    corpus.records[order[k]].split = k < n_train ? Split::train : Split::test;
  }
}

json parse_json_line(const std::string& line, size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw InputError("line " + std::to_string(line_no) + ": malformed record: " +
                     e.what());
  }
}

CorpusRecord jsonl_record(const json& j, size_t line_no, bool* has_split) {
  if (!j.contains("text") || !j.contains("label")) {
    throw InputError("line " + std::to_string(line_no) + ": missing text or label");
  }
  CorpusRecord r;
  r.text = j.at("text").get<std::string>();
  try {
    r.label = parse_label(j.at("label").get<std::string>());
  } catch (const InputError& e) {
    throw InputError("line " + std::to_string(line_no) + ": " + e.what());
  }
  if (j.contains("source")) r.source_tag = j.at("source").get<std::string>();
  *has_split = j.contains("split");
  if (*has_split) r.split = parse_split(j.at("split").get<std::string>());
  return r;
}

// Returns true when the records carried explicit splits.
bool load_jsonl_v1(const std::filesystem::path& path, Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  corpus.dataset_name = path.filename().string();
  std::string line;
  size_t line_no = 0, with_split = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    bool has_split = false;
    corpus.records.push_back(jsonl_record(parse_json_line(line, line_no), line_no,
                                          &has_split));
    with_split += has_split ? 1 : 0;
  }
  if (with_split != 0 && with_split != corpus.records.size()) {
    throw InputError("jsonl-v1: either every record carries a split or none does");
  }
  return with_split > 0;
}

void load_hc3_raw(const std::filesystem::path& path, Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  corpus.dataset_name = path.filename().string();
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_json_line(line, line_no);
    for (const auto& [key, label] :
         std::initializer_list<std::pair<const char*, Label>>{
             {"human_answers", Label::human}, {"chatgpt_answers", Label::ai}}) {
      if (!j.contains(key)) continue;
      for (const auto& answer : j.at(key)) {
        CorpusRecord r;
        r.text = answer.get<std::string>();
        r.label = label;
        r.source_tag = "hc3";
        corpus.records.push_back(std::move(r));
      }
    }
  }
}

void load_ghostbuster_dir(const std::filesystem::path& path, Corpus& corpus) {
  if (!std::filesystem::is_directory(path)) {
    throw IoError(path.string() + " is not a directory");
  }
  corpus.dataset_name = path.filename().string();
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    // Label by directory component: human/ holds human text, generator
    // directories hold machine text.
    std::optional<Label> label;
    for (const auto& part_path : file) {
      const std::string part = part_path.string();
      if (part == "human") label = Label::human;
      if (part == "gpt" || part == "gpt_writing" || part == "gpt_semantic" ||
          part == "gpt_prompt1" || part == "gpt_prompt2" || part == "claude") {
        label = Label::ai;
      }
    }
    if (!label) continue;
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) {
      text.pop_back();
    }
    CorpusRecord r;
    r.text = std::move(text);
    r.label = *label;
    r.source_tag = file.parent_path().filename().string();
    corpus.records.push_back(std::move(r));
  }
}

void load_seqxgpt_raw(const std::filesystem::path& path, Corpus& corpus) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  corpus.dataset_name = path.filename().string();
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_json_line(line, line_no);
    if (!j.contains("text") || !j.contains("label")) {
      throw InputError("line " + std::to_string(line_no) + ": missing text or label");
    }
    CorpusRecord r;
    r.text = j.at("text").get<std::string>();
    const std::string raw = j.at("label").get<std::string>();
    r.label = raw == "human" ? Label::human : Label::ai;
    r.source_tag = raw;
    corpus.records.push_back(std::move(r));
  }
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, const std::string& format_id,
                   uint64_t data_seed, double train_fraction) {
  Corpus corpus;
  bool has_explicit_splits = false;
  if (format_id == "jsonl-v1") {
    has_explicit_splits = load_jsonl_v1(path, corpus);
  } else if (format_id == "hc3-raw") {
    load_hc3_raw(path, corpus);
  } else if (format_id == "ghostbuster-dir") {
    load_ghostbuster_dir(path, corpus);
  } else if (format_id == "seqxgpt-raw") {
    load_seqxgpt_raw(path, corpus);
  } else {
    throw ConfigError("unknown corpus format: '" + format_id + "'");
  }
  if (corpus.records.empty()) throw InputError("corpus is empty: " + path.string());
  if (!has_explicit_splits) assign_splits(corpus, data_seed, train_fraction);
  corpus.recompute_checksum();
  corpus.assert_no_leakage();
  return corpus;
}

void save_corpus_jsonl(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : corpus.records) {
    json j{{"text", r.text},
           {"label", label_name(r.label)},
           {"split", split_name(r.split)}};
    if (!r.source_tag.empty()) j["source"] = r.source_tag;
    out << j.dump() << '\n';
  }
}

void sample_attack_set(Corpus& corpus, size_t n_per_class, uint64_t seed) {
  if (n_per_class == 0) return;
  for (Label l : {Label::human, Label::ai}) {
    std::vector<size_t> pool;
    for (size_t i = 0; i < corpus.records.size(); ++i) {
      if (corpus.records[i].split == Split::test && corpus.records[i].label == l) {
        pool.push_back(i);
      }
    }
    if (pool.size() < n_per_class) {
      throw InputError("attack set: not enough " + label_name(l) + " test samples (" +
                       std::to_string(pool.size()) + " < " +
                       std::to_string(n_per_class) + ")");
    }
    Rng rng(mix_seed(seed, static_cast<uint64_t>(label_index(l)) + 0xa77ac4));
    rng.shuffle(pool);
    for (size_t k = 0; k < n_per_class; ++k) {
      corpus.records[pool[k]].split = Split::attack;
    }
  }
}

namespace {

// Every group lists two report-register words, then two conversational
// ones. Both families share the same sentence skeletons and differ only in
// which side of each group fills the slots, so in-group substitutions can
// genuinely push a text across the style boundary.
const std::vector<std::vector<std::string>> kSynonymGroups{
    {"consistent", "uniform", "steady", "calm"},
    {"notable", "significant", "big", "wild"},
    {"indicates", "demonstrates", "shows", "looks"},
    {"evaluation", "analysis", "review", "look"},
    {"moreover", "furthermore", "honestly", "frankly"},
    {"reliable", "robust", "decent", "okay"},
    {"methodology", "procedure", "way", "trick"},
    {"anomalous", "irregular", "weird", "odd"},
    {"conclusion", "summary", "guess", "hunch"},
};

const std::vector<std::string> kNeutralNouns{
    "outcome", "result", "pattern", "signal", "series",
    "curve",   "chart",  "graph",   "sample", "reading",
};

enum GroupId {
  kAdjSteady = 0,
  kAdjNotable = 1,
  kVerbShow = 2,
  kNounReview = 3,
  kAdvLead = 4,
  kAdjReliable = 5,
  kNounMethod = 6,
  kAdjWeird = 7,
  kNounGuess = 8,
};

// How far a text's slot words may stray from its family's side of the
// groups. Texts without a register cue keep at most one crossed slot, so
// their marker majority still gives the label away; cue-bearing texts may
// cross freely because the cue itself identifies the register. Training on
// the freely-crossed texts is what forces a detector to weight the cues
// above any bounded amount of word-choice evidence.
struct SlotMixing {
  double cross_rate = 0.0;
  size_t max_crossed = 0;
  size_t crossed = 0;
};

std::string pick_side(Rng& rng, int group, bool report_side, SlotMixing& mix) {
  const auto& g = kSynonymGroups[group];
  bool cross = false;
  if (mix.crossed < mix.max_crossed && rng.uniform() < mix.cross_rate) {
    cross = true;
    ++mix.crossed;
  }
  const bool use_report = report_side != cross;
  const size_t base = use_report ? 0 : 2;
  // The report side is deliberately more predictable (skewed word choice),
  // mirroring how generated text concentrates probability mass.
  if (use_report) return g[base + (rng.uniform() < 0.8 ? 0 : 1)];
  return g[base + rng.uniform_index(2)];
}

// Conversational texts pick up one or two filler words; generated text
// never does. Fillers are rare tokens, so they also push the scoring-LM
// statistics (log-prob, rank, entropy) apart between the families. Their
// report-register counterparts are connective cue words. Neither list is in
// the thesaurus, so these tokens are class evidence a substitution attack
// cannot rewrite.
const std::vector<std::string> kFillers{
    "kinda", "sorta", "basically", "anyway", "tho",    "hmm",
    "yeah",  "maybe", "still",     "right",  "like",   "really",
};

const std::vector<std::string> kReportCues{
    "therefore", "thus", "hence", "accordingly", "additionally", "formally",
};

std::string insert_word(Rng& rng, std::string text, const std::string& extra) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    if (ch == ' ') {
      words.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  words.push_back(cur);
  const size_t at = 1 + rng.uniform_index(words.size() - 1);
  words.insert(words.begin() + static_cast<long>(at), extra);
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

std::string pick_neutral(Rng& rng) {
  return kNeutralNouns[rng.uniform_index(kNeutralNouns.size())];
}

std::string family_text(Rng& rng, bool report, SlotMixing mix) {
  switch (rng.uniform_index(5)) {
    case 0:
      return "the " + pick_neutral(rng) + " " + pick_side(rng, kVerbShow, report, mix) +
             " a " + pick_side(rng, kAdjSteady, report, mix) + " " + pick_neutral(rng) +
             " across the " + pick_neutral(rng);
    case 1:
      return pick_side(rng, kAdvLead, report, mix) + " the " +
             pick_side(rng, kNounMethod, report, mix) + " " +
             pick_side(rng, kVerbShow, report, mix) + " a " +
             pick_side(rng, kAdjNotable, report, mix) + " " + pick_neutral(rng) +
             " in this " + pick_side(rng, kNounReview, report, mix);
    case 2:
      return "the " + pick_neutral(rng) + " stays " +
             pick_side(rng, kAdjSteady, report, mix) + " and the " +
             pick_side(rng, kNounMethod, report, mix) + " " +
             pick_side(rng, kVerbShow, report, mix) + " a " +
             pick_side(rng, kAdjNotable, report, mix) + " " + pick_neutral(rng) +
             " " + pick_side(rng, kAdvLead, report, mix);
    case 3:
      return "in " + pick_side(rng, kNounGuess, report, mix) + " the " +
             pick_neutral(rng) + " " + pick_side(rng, kVerbShow, report, mix) +
             " a " + pick_side(rng, kAdjReliable, report, mix) + " " +
             pick_neutral(rng) + " today";
    default:
      // Long form: many individually-weak markers spread over the text.
      return pick_side(rng, kAdvLead, report, mix) + " the " +
             pick_side(rng, kNounMethod, report, mix) + " " +
             pick_side(rng, kVerbShow, report, mix) + " a " +
             pick_side(rng, kAdjSteady, report, mix) + " " + pick_neutral(rng) +
             " and the " + pick_side(rng, kNounReview, report, mix) + " " +
             pick_side(rng, kVerbShow, report, mix) + " a " +
             pick_side(rng, kAdjReliable, report, mix) + " " + pick_neutral(rng) +
             " overall";
  }
}

}  // namespace

const std::vector<std::vector<std::string>>& synthetic_synonym_groups() {
  return kSynonymGroups;
}

StaticThesaurus synthetic_thesaurus() { return StaticThesaurus(kSynonymGroups); }

Corpus synthetic_corpus(size_t n_train, size_t n_test, uint64_t seed) {
  if (n_train < 2 || n_test < 2) {
    throw ConfigError("synthetic corpus needs at least 2 train and 2 test records");
  }
  Corpus corpus;
  corpus.dataset_name = "synthetic-two-family";
  Rng rng(mix_seed(seed, 0x5e7));
  std::unordered_set<uint64_t> seen;
  auto emit = [&](Split split, Label label) {
    CorpusRecord r;
    r.label = label;
    r.split = split;
    r.source_tag = label == Label::ai ? "synthetic-report" : "synthetic-chat";
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const bool report = label == Label::ai;
      bool f1 = false, f2 = false, cue = false;
      if (report) {
        cue = rng.uniform() < 0.5;
      } else {
        f1 = rng.uniform() < 0.5;
        f2 = rng.uniform() < 0.5;
      }
      const bool has_register_mark = cue || f1 || f2;
      SlotMixing mix;
      if (has_register_mark && rng.uniform() < 0.5) {
        mix = SlotMixing{0.35, 99, 0};  // the register mark carries the label
      } else {
        mix = SlotMixing{0.18, 1, 0};
      }
      r.text = family_text(rng, report, mix);
      if (f1) r.text = insert_word(rng, r.text, kFillers[rng.uniform_index(kFillers.size())]);
      if (f2) r.text = insert_word(rng, r.text, kFillers[rng.uniform_index(kFillers.size())]);
      if (cue) r.text += " " + kReportCues[rng.uniform_index(kReportCues.size())];
      // Texts must be unique so the splits stay leak-free; fall back to a
      // numbered tail once the template space is exhausted.
      if (attempt > 500) r.text += " take " + std::to_string(attempt);
      if (seen.insert(fnv1a64(r.text)).second) break;
    }
    corpus.records.push_back(std::move(r));
  };
  for (size_t i = 0; i < n_train; ++i) {
    emit(Split::train, i % 2 == 0 ? Label::ai : Label::human);
  }
  for (size_t i = 0; i < n_test; ++i) {
    emit(Split::test, i % 2 == 0 ? Label::ai : Label::human);
  }
  corpus.recompute_checksum();
  corpus.assert_no_leakage();
  return corpus;
}

StaticThesaurus load_thesaurus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open thesaurus " + path.string());
  std::vector<std::vector<std::string>> groups;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> group;
    std::string word;
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!word.empty()) {
          group.push_back(word);
          word.clear();
        }
      } else {
        word.push_back(c);
      }
    }
    if (!word.empty()) group.push_back(word);
    if (group.size() >= 2) groups.push_back(std::move(group));
  }
  return StaticThesaurus(groups);
}

}  // namespace scrn
