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

#include <iostream>

#include "CLI11.hpp"
#include "scrn/campaign.hpp"

namespace {

using namespace scrn;

struct CliOptions {
  std::string config_path;
  std::vector<std::string> overrides;
};

ExperimentConfig resolve_config(const CliOptions& opts) {
  std::map<std::string, std::string> kv;
  if (!opts.config_path.empty()) kv = read_flat_config(opts.config_path);
  for (const std::string& assignment : opts.overrides) {
    apply_override(kv, assignment);
  }
  return parse_experiment_config(std::move(kv));
}

void add_common(CLI::App* cmd, CliOptions& opts) {
  cmd->add_option("--config", opts.config_path, "flat key = value configuration file");
  cmd->add_option("--set", opts.overrides, "override a config key (key=value)")
      ->take_all();
}

// Corpus resolution: synthetic corpora are generated in memory, anything
// else is loaded from data.path in data.format.
Corpus resolve_corpus(const ExperimentConfig& cfg) {
  if (cfg.data_format == "synthetic") {
    return synthetic_corpus(cfg.synthetic_train, cfg.synthetic_test, cfg.seed_data);
  }
  if (cfg.data_path.empty()) {
    throw ConfigError("data.path is required for format " + cfg.data_format);
  }
  return load_corpus(cfg.data_path, cfg.data_format, cfg.seed_data, cfg.train_fraction);
}

// Evaluation corpus for cross-domain / cross-genre scenarios: every record
// of the secondary corpus is treated as test data.
Corpus resolve_eval_corpus(const ExperimentConfig& cfg) {
  if (cfg.eval_path.empty()) return resolve_corpus(cfg);
  Corpus corpus = load_corpus(cfg.eval_path, cfg.eval_format, cfg.seed_data,
                              cfg.train_fraction);
  for (CorpusRecord& r : corpus.records) r.split = Split::test;
  corpus.recompute_checksum();
  return corpus;
}

struct LoadedVictim {
  std::unique_ptr<LoadedCheckpoint> model_ckpt;
  std::unique_ptr<MetricDetector> detector;
  std::unique_ptr<Victim> victim;
};

LoadedVictim load_victim(const ExperimentConfig& cfg) {
  LoadedVictim out;
  const std::filesystem::path dir = std::filesystem::path(cfg.checkpoint_dir) / "latest";
  if (cfg.method == "scrn") {
    out.model_ckpt = std::make_unique<LoadedCheckpoint>(load_checkpoint(dir));
    out.model_ckpt->model->set_inference_seed(cfg.seed_noise);
    out.victim = std::make_unique<ModelVictim>(*out.model_ckpt->model,
                                               out.model_ckpt->tokenizer);
  } else {
    out.detector = std::make_unique<MetricDetector>(load_metric_detector(dir));
    out.victim = std::make_unique<MetricVictim>(*out.detector);
  }
  return out;
}

int cmd_ingest(const CliOptions& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  Corpus corpus = resolve_corpus(cfg);
  save_corpus_jsonl(cfg.data_out, corpus);
  std::cout << "dataset " << corpus.dataset_name << " checksum " << std::hex
            << corpus.checksum << std::dec << "\n"
            << "train " << corpus.count(Split::train) << " (ai "
            << corpus.count(Split::train, Label::ai) << ", human "
            << corpus.count(Split::train, Label::human) << ")\n"
            << "test " << corpus.count(Split::test) << " (ai "
            << corpus.count(Split::test, Label::ai) << ", human "
            << corpus.count(Split::test, Label::human) << ")\n"
            << "wrote " << cfg.data_out << "\n";
  return 0;
}

int cmd_train(const CliOptions& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  const Corpus corpus = resolve_corpus(cfg);
  const TrainOutcome out = train_from_config(cfg, corpus);
  std::cout << "method " << cfg.method << " (" << cfg.ablation << ", "
            << objective_name(cfg.objective) << ")\n"
            << "steps " << out.steps << "\n"
            << "final train accuracy " << out.final_train_accuracy << "%\n";
  if (out.best_val_accuracy >= 0) {
    std::cout << "best validation accuracy " << out.best_val_accuracy << "%\n";
  }
  std::cout << "checkpoint " << out.latest_dir.string() << "\n";
  return 0;
}

int cmd_attack(const CliOptions& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  Corpus corpus = resolve_eval_corpus(cfg);
  sample_attack_set(corpus, cfg.attack_n_per_class, cfg.seed_attack);
  LoadedVictim v = load_victim(cfg);
  const CampaignOutput out = run_campaign(cfg, corpus, *v.victim, cfg.method);
  std::cout << "clean micro-F1 " << out.clean.micro_f1 << "%\n";
  for (const auto& [attack, rep] : out.by_attack) {
    std::cout << attack << ": OA " << rep.overall.oa_percent << " AUA "
              << rep.overall.aua_percent << " ASR " << rep.overall.asr_percent
              << " ANQ " << rep.overall.anq << "\n";
  }
  std::cout << "report " << out.csv_path.string() << "\n";
  return 0;
}

int cmd_eval(const CliOptions& opts) {
  ExperimentConfig cfg = resolve_config(opts);
  Corpus corpus = resolve_eval_corpus(cfg);
  LoadedVictim v = load_victim(cfg);

  ExperimentConfig clean_cfg = cfg;
  clean_cfg.attack_methods.clear();
  const CampaignOutput out = run_campaign(clean_cfg, corpus, *v.victim, cfg.method);
  std::cout << "P(ai) " << out.clean.precision_ai << " R(ai) " << out.clean.recall_ai
            << " P(h) " << out.clean.precision_human << " R(h) "
            << out.clean.recall_human << " micro-F1 " << out.clean.micro_f1 << "\n";

  if (cfg.target_fpr >= 0.0) {
    std::vector<double> scores;
    std::vector<Label> labels;
    for (size_t i : corpus.test_indices_including_attack()) {
      scores.push_back(v.victim->predict(corpus.records[i].text).distribution[1]);
      labels.push_back(corpus.records[i].label);
    }
    const ThresholdResult t = threshold_at_fpr(scores, labels, cfg.target_fpr);
    std::cout << "threshold@" << cfg.target_fpr << " fpr = " << t.threshold
              << " (achieved fpr " << t.achieved_fpr
              << (t.degenerate ? ", degenerate" : "") << ")\n";
  }

  if (!cfg.fluctuation_seeds.empty()) {
    if (cfg.method != "scrn") {
      throw ConfigError("fluctuation analysis needs the scrn method");
    }
    sample_attack_set(corpus, cfg.attack_n_per_class, cfg.seed_attack);
    const auto samples = attack_samples(corpus);
    StaticThesaurus thesaurus = cfg.thesaurus_path.empty()
                                    ? synthetic_thesaurus()
                                    : load_thesaurus(cfg.thesaurus_path);
    const std::string attack_name =
        cfg.attack_methods.empty() ? "pwws" : cfg.attack_methods.front();
    const FluctuationReport rep = fluctuation_analysis(
        [&](uint64_t seed) {
          return campaign_aua(*v.model_ckpt->model, v.model_ckpt->tokenizer, samples,
                              attack_name, cfg.attack_config(), thesaurus, cfg.workers,
                              seed);
        },
        cfg.fluctuation_seeds);
    for (const auto& [seed, aua] : rep.aua_by_seed) {
      std::cout << "seed " << seed << " AUA " << aua << "\n";
    }
    std::cout << "AUA spread " << rep.spread << "\n";
  }
  return 0;
}

int cmd_ablate(const CliOptions& opts, const std::vector<std::string>& variants) {
  std::vector<std::string> names = variants;
  if (names.empty()) {
    names = {"SCRN", "SCRN-SC", "SCRN-R", "SCRN-eps", "SCRN-Lreg", "baseline-encoder"};
  }
  std::vector<ReportRow> rows;
  std::filesystem::path out_root;
  for (const std::string& name : names) {
    (void)parse_ablation(name);  // validate early
    CliOptions variant_opts = opts;
    variant_opts.overrides.push_back("ablation=" + name);
    ExperimentConfig cfg = resolve_config(variant_opts);
    cfg.checkpoint_dir =
        (std::filesystem::path(cfg.checkpoint_dir) / name).string();
    cfg.out_dir = (std::filesystem::path(cfg.out_dir) / name).string();
    out_root = std::filesystem::path(cfg.out_dir).parent_path();

    Corpus corpus = resolve_corpus(cfg);
    sample_attack_set(corpus, cfg.attack_n_per_class, cfg.seed_attack);
    (void)train_from_config(cfg, corpus);
    LoadedVictim v = load_victim(cfg);
    const CampaignOutput out = run_campaign(cfg, corpus, *v.victim, name);
    for (const auto& [attack, rep] : out.by_attack) {
      rows.push_back(ReportRow{name, attack, "overall", rep.overall});
    }
    std::cout << name << " done\n";
  }
  std::filesystem::create_directories(out_root);
  std::ofstream csv(out_root / "ablation.csv");
  csv << robustness_csv(rows);
  std::ofstream md(out_root / "ablation.md");
  md << robustness_markdown(rows);
  std::cout << "wrote " << (out_root / "ablation.csv").string() << "\n";
  return 0;
}

int cmd_report(const CliOptions& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  const CampaignOutput out = report_from_logs(cfg, cfg.attack_methods, cfg.method);
  for (const auto& [attack, rep] : out.by_attack) {
    std::cout << attack << ": OA " << rep.overall.oa_percent << " AUA "
              << rep.overall.aua_percent << " ASR " << rep.overall.asr_percent
              << " ANQ " << rep.overall.anq << "\n";
  }
  std::cout << "report " << out.csv_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"detector training and adversarial robustness benchmark"};
  app.require_subcommand(1);

  CliOptions ingest_opts, train_opts, attack_opts, eval_opts, ablate_opts, report_opts;
  std::vector<std::string> ablate_variants;

  add_common(app.add_subcommand("ingest", "normalize a corpus into jsonl"), ingest_opts);
  add_common(app.add_subcommand("train", "train the configured detector"), train_opts);
  add_common(app.add_subcommand("attack", "run attack campaigns and reports"),
             attack_opts);
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "clean evaluation, fixed-FPR thresholding, fluctuation analysis");
  add_common(eval_cmd, eval_opts);
  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "train and attack the model variants");
  add_common(ablate_cmd, ablate_opts);
  ablate_cmd->add_option("--variants", ablate_variants,
                         "variant names (default: all documented variants)");
  add_common(app.add_subcommand("report", "recompute reports from attack logs"),
             report_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("ingest")) return cmd_ingest(ingest_opts);
    if (app.got_subcommand("train")) return cmd_train(train_opts);
    if (app.got_subcommand("attack")) return cmd_attack(attack_opts);
    if (app.got_subcommand("eval")) return cmd_eval(eval_opts);
    if (app.got_subcommand("ablate")) return cmd_ablate(ablate_opts, ablate_variants);
    if (app.got_subcommand("report")) return cmd_report(report_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
