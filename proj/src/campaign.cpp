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

#include "scrn/campaign.hpp"

#include <fstream>
#include <thread>

#include "json.hpp"

namespace scrn {

using nlohmann::json;

ModelVictim::ModelVictim(const SCRNModel& model, const WordTokenizer& tokenizer)
    : model_(model), tokenizer_(tokenizer) {}

Prediction ModelVictim::predict(const std::string& text) const {
  const TokenizedText t = tokenizer_.encode(text, Label::human);
  const BranchOutput out = model_.forward(t, model_.config().noise_mode);
  Prediction p;
  p.distribution = out.class_distribution;
  p.label = out.predicted_label;
  return p;
}

Prediction MetricVictim::predict(const std::string& text) const {
  const auto [dist, label] = det_.predict(text);
  Prediction p;
  p.distribution = dist;
  p.label = label;
  return p;
}

void append_attack_result(std::ostream& out, const AttackResult& r) {
  json edits = json::array();
  for (const Transformation& e : r.edits) {
    edits.push_back(json{{"kind", edit_kind_name(e.kind)},
                         {"position", e.position},
                         {"original", e.original},
                         {"replacement", e.replacement}});
  }
  out << json{{"original_text", r.original_text},
              {"perturbed_text", r.perturbed_text},
              {"true_label", label_name(r.true_label)},
              {"original_prediction", label_name(r.original_prediction)},
              {"final_prediction", label_name(r.final_prediction)},
              {"original_distribution", r.original_distribution},
              {"final_distribution", r.final_distribution},
              {"success", r.success},
              {"skipped", r.skipped},
              {"queries", r.queries},
              {"direction", direction_name(r.direction())},
              {"edits", edits}}
             .dump()
      << '\n';
  out.flush();
}

std::vector<AttackResult> read_attack_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open attack log " + path.string());
  std::vector<AttackResult> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IoError("attack log line " + std::to_string(line_no) + ": " + e.what());
    }
    AttackResult r;
    r.original_text = j.at("original_text").get<std::string>();
    r.perturbed_text = j.at("perturbed_text").get<std::string>();
    r.true_label = parse_label(j.at("true_label").get<std::string>());
    r.original_prediction = parse_label(j.at("original_prediction").get<std::string>());
    r.final_prediction = parse_label(j.at("final_prediction").get<std::string>());
    r.original_distribution = j.at("original_distribution").get<std::array<double, 2>>();
    r.final_distribution = j.at("final_distribution").get<std::array<double, 2>>();
    r.success = j.at("success").get<bool>();
    r.skipped = j.at("skipped").get<bool>();
    r.queries = j.at("queries").get<size_t>();
    for (const auto& je : j.at("edits")) {
      Transformation e;
      e.kind = parse_edit_kind(je.at("kind").get<std::string>());
      e.position = je.at("position").get<size_t>();
      e.original = je.at("original").get<std::string>();
      e.replacement = je.at("replacement").get<std::string>();
      r.edits.push_back(std::move(e));
    }
    r.validate();
    out.push_back(std::move(r));
  }
  return out;
}

double rescored_aua(SCRNModel& model, const WordTokenizer& tokenizer,
                    const std::vector<AttackResult>& results, uint64_t inference_seed) {
  if (results.empty()) throw InputError("rescored_aua: no attack results");
  model.set_inference_seed(inference_seed);
  ModelVictim victim(model, tokenizer);
  size_t correct = 0;
  for (const AttackResult& r : results) {
    if (victim.predict(r.perturbed_text).label == r.true_label) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(results.size());
}

std::vector<const CorpusRecord*> attack_samples(const Corpus& corpus) {
  std::vector<const CorpusRecord*> out;
  for (const CorpusRecord& r : corpus.records) {
    if (r.split == Split::attack) out.push_back(&r);
  }
  return out;
}

namespace {

AttackResult run_one(const Victim& victim, const CorpusRecord& record,
                     const std::string& attack_name, const AttackConfig& config,
                     const Thesaurus& thesaurus) {
  if (attack_name == "pwws") {
    return pwws_attack(victim, record.text, record.label, config, thesaurus);
  }
  if (attack_name == "deepwordbug") {
    return deepwordbug_attack(victim, record.text, record.label, config);
  }
  if (attack_name == "pruthi") {
    return pruthi_attack(victim, record.text, record.label, config);
  }
  throw ConfigError("unknown attack: '" + attack_name + "'");
}

}  // namespace

std::vector<AttackResult> run_attack_over_set(
    const Victim& victim, const std::vector<const CorpusRecord*>& samples,
    const std::string& attack_name, const AttackConfig& config,
    const Thesaurus& thesaurus, size_t workers) {
  std::vector<AttackResult> results(samples.size());
  if (workers <= 1) {
    for (size_t i = 0; i < samples.size(); ++i) {
      results[i] = run_one(victim, *samples[i], attack_name, config, thesaurus);
    }
    return results;
  }
  // Chunked parallelism: results are stored by sample index, so the output
  // order is independent of scheduling.
  for (size_t begin = 0; begin < samples.size(); begin += workers) {
    const size_t end = std::min(begin + workers, samples.size());
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(end - begin);
    for (size_t i = begin; i < end; ++i) {
      pool.emplace_back([&, i]() {
        try {
          results[i] = run_one(victim, *samples[i], attack_name, config, thesaurus);
        } catch (...) {
          errors[i - begin] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  return results;
}

CampaignOutput run_campaign(const ExperimentConfig& cfg, const Corpus& corpus,
                            const Victim& victim, const std::string& method_name) {
  const std::filesystem::path out_dir(cfg.out_dir);
  std::filesystem::create_directories(out_dir);

  CampaignOutput output;

  // Clean evaluation over the full test distribution (attack set included).
  {
    std::vector<Label> predictions, labels;
    for (size_t i : corpus.test_indices_including_attack()) {
      predictions.push_back(victim.predict(corpus.records[i].text).label);
      labels.push_back(corpus.records[i].label);
    }
    if (predictions.empty()) throw InputError("campaign: empty test split");
    output.clean = classification_report(predictions, labels);
  }

  const std::vector<const CorpusRecord*> samples = attack_samples(corpus);
  StaticThesaurus thesaurus = cfg.thesaurus_path.empty()
                                  ? synthetic_thesaurus()
                                  : load_thesaurus(cfg.thesaurus_path);

  std::vector<ReportRow> rows;
  for (const std::string& attack_name : cfg.attack_methods) {
    if (samples.empty()) {
      throw InputError("campaign: attack requested but the attack set is empty");
    }
    const std::filesystem::path log_path = out_dir / ("attack_" + attack_name + ".jsonl");
    std::ofstream log(log_path, std::ios::trunc);
    if (!log) throw IoError("cannot write " + log_path.string());
    std::vector<AttackResult> results;
    try {
      results = run_attack_over_set(victim, samples, attack_name, cfg.attack_config(),
                                    thesaurus, cfg.workers);
    } catch (...) {
      // Flush whatever completed before the abort.
      for (const AttackResult& r : results) append_attack_result(log, r);
      throw;
    }
    for (const AttackResult& r : results) append_attack_result(log, r);
    output.log_paths[attack_name] = log_path;
    const RobustnessReport rep = robustness_metrics(results);
    output.by_attack[attack_name] = rep;
    for (ReportRow& row : report_rows(method_name, attack_name, rep)) {
      rows.push_back(std::move(row));
    }
  }

  output.csv_path = out_dir / "robustness.csv";
  output.md_path = out_dir / "report.md";
  {
    std::ofstream csv(output.csv_path, std::ios::trunc);
    csv << robustness_csv(rows);
    std::ofstream clean_csv(out_dir / "classification.csv", std::ios::trunc);
    clean_csv << classification_csv(method_name, output.clean);
    std::ofstream md(output.md_path, std::ios::trunc);
    md << "## Detection without attack\n\n"
       << classification_markdown(method_name, output.clean) << '\n';
    if (!rows.empty()) {
      md << "## Robustness under attack\n\n" << robustness_markdown(rows);
    }
  }
  return output;
}

CampaignOutput report_from_logs(const ExperimentConfig& cfg,
                                const std::vector<std::string>& attack_names,
                                const std::string& method_name) {
  const std::filesystem::path out_dir(cfg.out_dir);
  CampaignOutput output;
  std::vector<ReportRow> rows;
  for (const std::string& attack_name : attack_names) {
    const std::filesystem::path log_path = out_dir / ("attack_" + attack_name + ".jsonl");
    const std::vector<AttackResult> results = read_attack_log(log_path);
    output.log_paths[attack_name] = log_path;
    const RobustnessReport rep = robustness_metrics(results);
    output.by_attack[attack_name] = rep;
    for (ReportRow& row : report_rows(method_name, attack_name, rep)) {
      rows.push_back(std::move(row));
    }
  }
  output.csv_path = out_dir / "robustness.csv";
  output.md_path = out_dir / "report.md";
  std::ofstream csv(output.csv_path, std::ios::trunc);
  csv << robustness_csv(rows);
  std::ofstream md(output.md_path, std::ios::trunc);
  md << "## Robustness under attack (recomputed from logs)\n\n"
     << robustness_markdown(rows);
  return output;
}

double campaign_aua(SCRNModel& model, const WordTokenizer& tokenizer,
                    const std::vector<const CorpusRecord*>& samples,
                    const std::string& attack_name, const AttackConfig& config,
                    const Thesaurus& thesaurus, size_t workers,
                    uint64_t inference_seed) {
  // The inference seed is run-level state; setting it between runs reruns
  // the identical evaluation under different noise.
  model.set_inference_seed(inference_seed);
  ModelVictim victim(model, tokenizer);
  const std::vector<AttackResult> results =
      run_attack_over_set(victim, samples, attack_name, config, thesaurus, workers);
  return robustness_metrics(results).overall.aua_percent;
}

}  // namespace scrn
