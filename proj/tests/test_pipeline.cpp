#include "scrn/campaign.hpp"

#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"

using namespace scrn;
using scrn::test::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "missing file " << p.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void spit(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

// Small end-to-end configuration that trains in a couple of seconds.
ExperimentConfig tiny_experiment(const TempDir& dir, const std::string& extra = "") {
  std::string text =
      "data.format = synthetic\n"
      "data.synthetic_train = 240\n"
      "data.synthetic_test = 40\n"
      "model.d = 16\n"
      "model.d_z = 8\n"
      "model.layers = 1\n"
      "model.heads = 2\n"
      "model.ffn = 32\n"
      "model.max_len = 24\n"
      "train.batch = 16\n"
      "train.epochs = 3\n"
      "train.lr = 0.005\n"
      "attack.n_per_class = 4\n"
      "attack.max_queries = 200\n"
      "attack.methods = pwws\n";
  text += "train.out = " + (dir.path() / "ckpt").string() + "\n";
  text += "train.runlog = " + (dir.path() / "runlog.jsonl").string() + "\n";
  text += "attack.out = " + (dir.path() / "out").string() + "\n";
  text += extra;
  return parse_experiment_config(parse_flat_config(text));
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("train/test split sizes use a floor on the test share") {
  // 26,903 + 58,546 records split 90/10.
  const auto [n_train, n_test] = train_test_sizes(85449, 0.9);
  CHECK(n_train == 76905);
  CHECK(n_test == 8544);
  CHECK_THROWS_AS((void)train_test_sizes(10, 1.5), ConfigError);
}

TEST_CASE("synthetic corpus: deterministic, balanced, leak-free") {
  const Corpus a = synthetic_corpus(100, 20, 7);
  const Corpus b = synthetic_corpus(100, 20, 7);
  REQUIRE(a.records.size() == 120);
  CHECK(a.checksum == b.checksum);
  for (size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].text == b.records[i].text);
    CHECK(a.records[i].label == b.records[i].label);
    CHECK(a.records[i].split == b.records[i].split);
  }
  CHECK(a.count(Split::train) == 100);
  CHECK(a.count(Split::test) == 20);
  CHECK(a.count(Split::train, Label::ai) == 50);
  CHECK(a.count(Split::train, Label::human) == 50);
  CHECK_NOTHROW(a.assert_no_leakage());

  const Corpus c = synthetic_corpus(100, 20, 8);
  CHECK(c.checksum != a.checksum);
}

TEST_CASE("jsonl-v1 round trip reproduces the corpus") {
  TempDir dir("jsonl");
  Corpus corpus = synthetic_corpus(20, 10, 3);
  sample_attack_set(corpus, 2, 5);
  const auto path = dir.path() / "corpus.jsonl";
  save_corpus_jsonl(path, corpus);
  const Corpus loaded = load_corpus(path, "jsonl-v1", /*data_seed=*/99);
  REQUIRE(loaded.records.size() == corpus.records.size());
  for (size_t i = 0; i < corpus.records.size(); ++i) {
    CHECK(loaded.records[i].text == corpus.records[i].text);
    CHECK(loaded.records[i].label == corpus.records[i].label);
    CHECK(loaded.records[i].split == corpus.records[i].split);
    CHECK(loaded.records[i].source_tag == corpus.records[i].source_tag);
  }
  CHECK(loaded.checksum == corpus.checksum);
}

TEST_CASE("jsonl-v1 loader reports malformed lines and unknown labels") {
  TempDir dir("jsonl_err");
  const auto bad_json = dir.path() / "bad.jsonl";
  spit(bad_json, "{\"text\":\"ok\",\"label\":\"ai\"}\nnot json\n");
  CHECK_THROWS_WITH_AS((void)load_corpus(bad_json, "jsonl-v1", 1),
                       doctest::Contains("line 2"), InputError);

  const auto bad_label = dir.path() / "label.jsonl";
  spit(bad_label, "{\"text\":\"ok\",\"label\":\"robot\"}\n");
  CHECK_THROWS_WITH_AS((void)load_corpus(bad_label, "jsonl-v1", 1),
                       doctest::Contains("unknown label"), InputError);

  CHECK_THROWS_AS((void)load_corpus(bad_json, "no-such-format", 1), ConfigError);
}

TEST_CASE("raw adapters normalize into labeled records") {
  TempDir dir("raw");
  {
    const auto hc3 = dir.path() / "hc3.jsonl";
    spit(hc3,
         "{\"question\":\"q1\",\"human_answers\":[\"human one\",\"human two\"],"
         "\"chatgpt_answers\":[\"machine one\"]}\n"
         "{\"question\":\"q2\",\"human_answers\":[\"human three\"],"
         "\"chatgpt_answers\":[\"machine two\",\"machine three\"]}\n");
    const Corpus c = load_corpus(hc3, "hc3-raw", 11, 0.5);
    CHECK(c.records.size() == 6);
    size_t human = 0;
    for (const auto& r : c.records) human += r.label == Label::human ? 1 : 0;
    CHECK(human == 3);
    // Same seed reproduces the same split.
    const Corpus c2 = load_corpus(hc3, "hc3-raw", 11, 0.5);
    for (size_t i = 0; i < c.records.size(); ++i) {
      CHECK(c.records[i].split == c2.records[i].split);
    }
  }
  {
    std::filesystem::create_directories(dir.path() / "gb" / "essay" / "human");
    std::filesystem::create_directories(dir.path() / "gb" / "essay" / "gpt");
    spit(dir.path() / "gb" / "essay" / "human" / "a.txt", "a human essay\n");
    spit(dir.path() / "gb" / "essay" / "gpt" / "b.txt", "a machine essay\n");
    const Corpus c = load_corpus(dir.path() / "gb", "ghostbuster-dir", 3, 0.5);
    REQUIRE(c.records.size() == 2);
    CHECK(c.records[0].label == Label::ai);  // files sorted: gpt/b.txt first
    CHECK(c.records[0].text == "a machine essay");
    CHECK(c.records[1].label == Label::human);
  }
  {
    const auto sx = dir.path() / "sx.jsonl";
    spit(sx,
         "{\"text\":\"written by a person\",\"label\":\"human\"}\n"
         "{\"text\":\"sampled from gpt2\",\"label\":\"gpt2\"}\n"
         "{\"text\":\"sampled from llama\",\"label\":\"llama\"}\n"
         "{\"text\":\"someone typed this\",\"label\":\"human\"}\n");
    const Corpus c = load_corpus(sx, "seqxgpt-raw", 5, 0.5);
    CHECK(c.records[1].label == Label::ai);
    CHECK(c.records[1].source_tag == "gpt2");
    CHECK(c.records[2].source_tag == "llama");
    CHECK(c.records[3].label == Label::human);
  }
}

TEST_CASE("attack set sampling is seeded and within the test split") {
  Corpus corpus = synthetic_corpus(40, 20, 5);
  Corpus again = synthetic_corpus(40, 20, 5);

  sample_attack_set(corpus, 0, 9);
  CHECK(corpus.count(Split::attack) == 0);

  sample_attack_set(corpus, 3, 9);
  sample_attack_set(again, 3, 9);
  CHECK(corpus.count(Split::attack) == 6);
  CHECK(corpus.count(Split::attack, Label::ai) == 3);
  CHECK(corpus.count(Split::attack, Label::human) == 3);
  for (size_t i = 0; i < corpus.records.size(); ++i) {
    CHECK(corpus.records[i].split == again.records[i].split);
  }
  // The attack set came out of the test split, never train.
  CHECK(corpus.count(Split::train) == 40);

  CHECK_THROWS_AS(sample_attack_set(corpus, 1000, 1), InputError);
}

TEST_CASE("flat config: comments, overrides and unknown keys") {
  auto kv = parse_flat_config(
      "# a comment\n"
      "model.d = 32   # trailing comment\n"
      "\n"
      "loss.alpha = 4.0\n");
  CHECK(kv.at("model.d") == "32");
  CHECK(kv.at("loss.alpha") == "4.0");
  apply_override(kv, "model.d=64");
  CHECK(kv.at("model.d") == "64");
  CHECK_THROWS_AS((void)parse_flat_config("just words\n"), ConfigError);
  CHECK_THROWS_AS(apply_override(kv, "nonsense"), ConfigError);

  kv["mistyped.key"] = "1";
  CHECK_THROWS_WITH_AS((void)parse_experiment_config(kv),
                       doctest::Contains("mistyped.key"), ConfigError);
}

TEST_CASE("experiment config resolves modes and validates") {
  {
    ExperimentConfig cfg = parse_experiment_config(parse_flat_config(
        "model.d = 32\nmodel.d_z = 16\nloss.alpha = 4.0\nablation = SCRN-SC\n"));
    CHECK(cfg.model.d == 32);
    CHECK(cfg.loss.alpha == 4.0);
    CHECK(cfg.objective == TrainingObjective::single_branch);
    CHECK(cfg.loss.lambda3 == 0.0);
  }
  CHECK_THROWS_WITH_AS(
      (void)parse_experiment_config(parse_flat_config("train.mode = flooding\n")),
      doctest::Contains("flood_level"), ConfigError);
  {
    ExperimentConfig cfg = parse_experiment_config(
        parse_flat_config("train.mode = flooding\nloss.flood_level = 0.3\n"));
    CHECK(cfg.objective == TrainingObjective::flooding);
    CHECK_FALSE(cfg.flags.reconstruction);
  }
  {
    ExperimentConfig cfg = parse_experiment_config(
        parse_flat_config("train.mode = rdrop\nloss.rdrop_weight = 1.0\n"));
    CHECK(cfg.objective == TrainingObjective::rdrop);
    CHECK(cfg.flags.dropout_repr);
  }
  CHECK_THROWS_AS((void)parse_experiment_config(
                      parse_flat_config("attack.methods = pwws, teleport\n")),
                  ConfigError);
  {
    ExperimentConfig cfg =
        parse_experiment_config(parse_flat_config("attack.methods = none\n"));
    CHECK(cfg.attack_methods.empty());
  }
}

TEST_CASE("checkpoint round trip restores parameters and tokenizer") {
  TempDir dir("ckpt");
  ExperimentConfig cfg = tiny_experiment(dir);
  Vocabulary vocab;
  for (const char* w : {"alpha", "beta", "gamma"}) vocab.add(w);
  SCRNModel model(cfg.model, cfg.flags, vocab.size(), cfg.seed_model);

  CheckpointManifest manifest;
  manifest.build = build_id();
  manifest.config_echo = cfg.echo();
  manifest.step = 17;
  save_checkpoint(dir.path() / "m", model, vocab, manifest);

  LoadedCheckpoint loaded = load_checkpoint(dir.path() / "m");
  CHECK(loaded.manifest.step == 17);
  CHECK(loaded.tokenizer.vocab().size() == vocab.size());
  const auto orig = model.params();
  const auto rest = loaded.model->params();
  REQUIRE(orig.size() == rest.size());
  for (size_t i = 0; i < orig.size(); ++i) {
    CHECK(orig[i]->value.a == rest[i]->value.a);
  }

  // Dim validation: a truncated blob is rejected.
  {
    std::ofstream trunc(dir.path() / "m" / "params.bin",
                        std::ios::binary | std::ios::trunc);
    const uint64_t lie = 3;
    trunc.write(reinterpret_cast<const char*>(&lie), sizeof(lie));
  }
  CHECK_THROWS_AS((void)load_checkpoint(dir.path() / "m"), IoError);
}

TEST_CASE("training run: deterministic artifacts and a sane run log") {
  TempDir dir_a("train_a"), dir_b("train_b");
  ExperimentConfig cfg_a = tiny_experiment(dir_a);
  ExperimentConfig cfg_b = tiny_experiment(dir_b);
  const Corpus corpus = synthetic_corpus(cfg_a.synthetic_train, cfg_a.synthetic_test,
                                         cfg_a.seed_data);

  const TrainOutcome out_a = train_model(cfg_a, corpus);
  const TrainOutcome out_b = train_model(cfg_b, corpus);

  CHECK(out_a.steps == 3 * ((228 + 15) / 16));  // 5% val carve-out of 240
  CHECK(out_a.final_train_accuracy == out_b.final_train_accuracy);
  // Identical config and seeds give byte-identical parameter blobs,
  // manifests and loss traces.
  CHECK(slurp(out_a.latest_dir / "params.bin") == slurp(out_b.latest_dir / "params.bin"));
  CHECK(slurp(out_a.latest_dir / "manifest.json") ==
        slurp(out_b.latest_dir / "manifest.json"));
  CHECK(slurp(dir_a.path() / "runlog.jsonl") == slurp(dir_b.path() / "runlog.jsonl"));

  // Run-log records carry the documented fields.
  std::ifstream log(dir_a.path() / "runlog.jsonl");
  std::string first;
  REQUIRE(std::getline(log, first));
  const auto j = nlohmann::json::parse(first);
  for (const char* key : {"step", "l_cls", "l_re", "l_sc", "l_all", "seed"}) {
    CHECK_MESSAGE(j.contains(key), "run log missing " << key);
  }
  CHECK(j.at("step").get<int>() == 1);

  // The desk task is separable: training accuracy is high after 2 epochs.
  CHECK(out_a.final_train_accuracy >= 95.0);
}

TEST_CASE("zero training steps leave the checkpoint at initialization") {
  TempDir dir("train_zero");
  ExperimentConfig cfg = tiny_experiment(dir, "train.epochs = 0\n");
  const Corpus corpus = synthetic_corpus(60, 10, cfg.seed_data);
  const TrainOutcome out = train_model(cfg, corpus);
  CHECK(out.steps == 0);

  LoadedCheckpoint loaded = load_checkpoint(out.latest_dir);
  // Fresh model with the same seeds and vocabulary equals the checkpoint.
  SCRNModel fresh(cfg.model, cfg.flags, loaded.tokenizer.vocab().size(),
                  cfg.seed_model);
  const auto a = fresh.params();
  const auto b = loaded.model->params();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i]->value.a == b[i]->value.a);
}

TEST_CASE("training divergence is reported with the offending step") {
  TempDir dir("train_div");
  ExperimentConfig cfg = tiny_experiment(dir, "train.lr = 1e300\n");
  const Corpus corpus = synthetic_corpus(40, 10, cfg.seed_data);
  CHECK_THROWS_AS((void)train_model(cfg, corpus), NumericError);
}

TEST_CASE("campaign produces consistent artifacts and replayable logs") {
  TempDir dir("campaign");
  ExperimentConfig cfg = tiny_experiment(dir);
  Corpus corpus = synthetic_corpus(cfg.synthetic_train, cfg.synthetic_test,
                                   cfg.seed_data);
  sample_attack_set(corpus, cfg.attack_n_per_class, cfg.seed_attack);

  (void)train_model(cfg, corpus);
  LoadedCheckpoint ckpt = load_checkpoint(std::filesystem::path(cfg.checkpoint_dir) /
                                          "latest");
  ModelVictim victim(*ckpt.model, ckpt.tokenizer);
  const CampaignOutput run = run_campaign(cfg, corpus, victim, "scrn");

  CHECK(std::filesystem::exists(run.csv_path));
  CHECK(std::filesystem::exists(run.md_path));
  REQUIRE(run.by_attack.count("pwws") == 1);
  REQUIRE(run.log_paths.count("pwws") == 1);

  // Replaying the persisted log reproduces the report without re-attacking.
  const std::string csv_before = slurp(run.csv_path);
  const CampaignOutput replay = report_from_logs(cfg, {"pwws"}, "scrn");
  const RobustnessReport& a = run.by_attack.at("pwws");
  const RobustnessReport& b = replay.by_attack.at("pwws");
  CHECK(a.overall.oa_percent == b.overall.oa_percent);
  CHECK(a.overall.aua_percent == b.overall.aua_percent);
  CHECK(a.overall.asr_percent == b.overall.asr_percent);
  CHECK(a.overall.anq == b.overall.anq);
  CHECK(slurp(replay.csv_path) == csv_before);

  // Rerunning the whole campaign is byte-stable.
  const CampaignOutput rerun = run_campaign(cfg, corpus, victim, "scrn");
  CHECK(slurp(rerun.csv_path) == csv_before);

  // Log records are well-formed attack results.
  const auto results = read_attack_log(run.log_paths.at("pwws"));
  CHECK(results.size() == 2 * cfg.attack_n_per_class);
  for (const auto& r : results) CHECK_NOTHROW(r.validate());
}

TEST_CASE("metric detector path trains, persists and serves as a victim") {
  TempDir dir("metric");
  ExperimentConfig cfg = tiny_experiment(dir, "method = log-likelihood\n");
  Corpus corpus = synthetic_corpus(cfg.synthetic_train, cfg.synthetic_test,
                                   cfg.seed_data);
  const TrainOutcome out = train_from_config(cfg, corpus);
  CHECK(out.final_train_accuracy > 60.0);
  CHECK(is_metric_checkpoint(out.latest_dir));
  const MetricDetector det = load_metric_detector(out.latest_dir);
  MetricVictim victim(det);
  const Prediction p = victim.predict(corpus.records[0].text);
  CHECK(p.distribution[0] + p.distribution[1] == doctest::Approx(1.0));
}

TEST_CASE("fluctuation wiring: zero noise or zero z_p means zero spread") {
  TempDir dir("fluct");
  ExperimentConfig cfg = tiny_experiment(dir, "attack.n_per_class = 2\n");
  Corpus corpus = synthetic_corpus(40, 12, cfg.seed_data);
  sample_attack_set(corpus, 2, cfg.seed_attack);
  const auto samples = attack_samples(corpus);
  StaticThesaurus thesaurus = synthetic_thesaurus();

  std::vector<std::string> train_texts;
  for (size_t i : corpus.indices(Split::train)) {
    train_texts.push_back(corpus.records[i].text);
  }
  const WordTokenizer tok = WordTokenizer::fit(train_texts);

  {
    ModelConfig mc = cfg.model;
    mc.noise_mode = NoiseMode::zero;
    SCRNModel model(mc, cfg.flags, tok.vocab().size(), cfg.seed_model);
    const FluctuationReport rep = fluctuation_analysis(
        [&](uint64_t seed) {
          return campaign_aua(model, tok, samples, "pwws", cfg.attack_config(),
                              thesaurus, 1, seed);
        },
        {1, 2, 3, 4, 5});
    CHECK(rep.spread == 0.0);
  }
  {
    SCRNModel model(cfg.model, cfg.flags, tok.vocab().size(), cfg.seed_model);
    for (Param* p : model.params()) {
      if (p->name == "re.w_p" || p->name == "re.b_p") p->value.fill(0.0);
    }
    const FluctuationReport rep = fluctuation_analysis(
        [&](uint64_t seed) {
          return campaign_aua(model, tok, samples, "pwws", cfg.attack_config(),
                              thesaurus, 1, seed);
        },
        {1, 2, 3, 4, 5});
    CHECK(rep.spread == 0.0);
  }
}

TEST_CASE("attack campaigns are invariant to the worker count") {
  TempDir dir("workers");
  ExperimentConfig cfg = tiny_experiment(dir, "attack.n_per_class = 3\n");
  Corpus corpus = synthetic_corpus(60, 16, cfg.seed_data);
  sample_attack_set(corpus, 3, cfg.seed_attack);
  const auto samples = attack_samples(corpus);

  std::vector<std::string> train_texts;
  for (size_t i : corpus.indices(Split::train)) {
    train_texts.push_back(corpus.records[i].text);
  }
  const WordTokenizer tok = WordTokenizer::fit(train_texts);
  SCRNModel model(cfg.model, cfg.flags, tok.vocab().size(), cfg.seed_model);
  model.set_inference_seed(cfg.seed_noise);
  ModelVictim victim(model, tok);
  StaticThesaurus thesaurus = synthetic_thesaurus();

  const auto seq = run_attack_over_set(victim, samples, "pwws", cfg.attack_config(),
                                       thesaurus, 1);
  const auto par = run_attack_over_set(victim, samples, "pwws", cfg.attack_config(),
                                       thesaurus, 3);
  REQUIRE(seq.size() == par.size());
  for (size_t i = 0; i < seq.size(); ++i) {
    CHECK(seq[i].perturbed_text == par[i].perturbed_text);
    CHECK(seq[i].queries == par[i].queries);
    CHECK(seq[i].success == par[i].success);
  }
}

}  // TEST_SUITE
