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

#include "scrn/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace scrn {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      const std::string t = trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  const std::string t = trim(cur);
  if (!t.empty()) out.push_back(t);
  return out;
}

// Key consumer: reads and erases recognized keys so leftovers can be
// reported as unknown.
class KeyReader {
 public:
  explicit KeyReader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::string v = it->second;
    kv_.erase(it);
    return v;
  }

  double num(const std::string& key, double fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string v = it->second;
    kv_.erase(it);
    try {
      size_t pos = 0;
      const double out = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return out;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
    }
  }

  size_t uint(const std::string& key, size_t fallback) {
    const double v = num(key, static_cast<double>(fallback));
    if (v < 0 || v != std::floor(v)) {
      throw ConfigError("config key '" + key + "': expected a nonnegative integer");
    }
    return static_cast<size_t>(v);
  }

  bool flag(const std::string& key, bool fallback) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string v = it->second;
    kv_.erase(it);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
  }

  std::vector<size_t> size_list(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return {};
    const auto parts = split_list(it->second);
    kv_.erase(it);
    std::vector<size_t> out;
    for (const auto& p : parts) {
      try {
        out.push_back(static_cast<size_t>(std::stoul(p)));
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': bad list entry '" + p + "'");
      }
    }
    return out;
  }

  std::vector<std::string> str_list(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return {};
    auto out = split_list(it->second);
    kv_.erase(it);
    return out;
  }

  void finish() const {
    if (kv_.empty()) return;
    std::ostringstream msg;
    msg << "unknown config key(s):";
    for (const auto& [k, v] : kv_) msg << " '" << k << "'";
    throw ConfigError(msg.str());
  }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace

std::map<std::string, std::string> parse_flat_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> read_flat_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_flat_config(buf.str());
}

void apply_override(std::map<std::string, std::string>& kv,
                    const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must be key=value: '" + assignment + "'");
  }
  kv[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

AttackConfig ExperimentConfig::attack_config() const {
  AttackConfig c;
  c.budget = budget;
  c.filter = filter;
  c.pruthi_max_words = pruthi_max_words;
  c.seed = seed_attack;
  return c;
}

ExperimentConfig parse_experiment_config(std::map<std::string, std::string> kv) {
  KeyReader r(std::move(kv));
  ExperimentConfig c;

  c.data_format = r.str("data.format", c.data_format);
  c.data_path = r.str("data.path", c.data_path);
  c.data_out = r.str("data.out", c.data_out);
  c.eval_path = r.str("data.eval_path", c.eval_path);
  c.eval_format = r.str("data.eval_format", c.eval_format);
  c.scenario = r.str("scenario", c.scenario);
  c.train_fraction = r.num("data.train_fraction", c.train_fraction);
  c.synthetic_train = r.uint("data.synthetic_train", c.synthetic_train);
  c.synthetic_test = r.uint("data.synthetic_test", c.synthetic_test);

  c.method = r.str("method", c.method);
  c.model.d = r.uint("model.d", c.model.d);
  c.model.d_z = r.uint("model.d_z", c.model.d_z);
  c.model.encoder.kind = r.str("model.encoder", c.model.encoder.kind);
  c.model.encoder.toy.layers = r.uint("model.layers", c.model.encoder.toy.layers);
  c.model.encoder.toy.heads = r.uint("model.heads", c.model.encoder.toy.heads);
  c.model.encoder.toy.ffn = r.uint("model.ffn", c.model.encoder.toy.ffn);
  c.model.encoder.toy.max_len = r.uint("model.max_len", c.model.encoder.toy.max_len);
  {
    auto enc = r.size_list("model.enc_layers");
    auto dec = r.size_list("model.dec_layers");
    auto cls = r.size_list("model.cls_layers");
    c.model.mlp_enc_layers = enc;
    c.model.mlp_dec_layers = dec;
    c.model.classifier_layers = cls;
  }
  c.model.noise_mode = parse_noise_mode(
      r.str("model.noise_mode", noise_mode_name(c.model.noise_mode)));
  {
    const std::string g = r.str("model.noise_granularity", "per-token");
    if (g == "per-token") {
      c.model.noise_granularity = NoiseGranularity::per_token;
    } else if (g == "per-sequence") {
      c.model.noise_granularity = NoiseGranularity::per_sequence;
    } else {
      throw ConfigError("model.noise_granularity: expected per-token or per-sequence");
    }
  }
  c.model.fixed_noise_seed = r.uint("model.fixed_noise_seed", 0);
  c.flags.dropout_rate = r.num("model.dropout", c.flags.dropout_rate);
  c.ablation = r.str("ablation", c.ablation);
  c.train_mode = r.str("train.mode", c.train_mode);

  c.loss.alpha = r.num("loss.alpha", c.loss.alpha);
  c.loss.beta = r.num("loss.beta", c.loss.beta);
  c.loss.lambda1 = r.num("loss.lambda1", c.loss.lambda1);
  c.loss.lambda2 = r.num("loss.lambda2", c.loss.lambda2);
  c.loss.lambda3 = r.num("loss.lambda3", c.loss.lambda3);
  if (r.has("loss.flood_level")) c.loss.flood_level = r.num("loss.flood_level", 0.0);
  if (r.has("loss.rdrop_weight")) c.loss.rdrop_weight = r.num("loss.rdrop_weight", 0.0);

  c.batch = r.uint("train.batch", c.batch);
  c.epochs = r.uint("train.epochs", c.epochs);
  c.lr = r.num("train.lr", c.lr);
  c.weight_decay = r.num("train.weight_decay", c.weight_decay);
  c.val_fraction = r.num("train.val_fraction", c.val_fraction);
  c.checkpoint_dir = r.str("train.out", c.checkpoint_dir);
  c.runlog = r.str("train.runlog", c.runlog);

  {
    auto methods = r.str_list("attack.methods");
    if (!methods.empty()) c.attack_methods = methods;
    if (c.attack_methods.size() == 1 && c.attack_methods[0] == "none") {
      c.attack_methods.clear();
    }
    for (const auto& m : c.attack_methods) {
      if (m != "pwws" && m != "deepwordbug" && m != "pruthi") {
        throw ConfigError("attack.methods: unknown attack '" + m + "'");
      }
    }
  }
  c.attack_n_per_class = r.uint("attack.n_per_class", c.attack_n_per_class);
  c.budget.max_queries = r.uint("attack.max_queries", c.budget.max_queries);
  c.budget.max_fraction_perturbed =
      r.num("attack.max_fraction", c.budget.max_fraction_perturbed);
  c.budget.candidate_cap = r.uint("attack.candidate_cap", c.budget.candidate_cap);
  c.filter.min_word_len = r.uint("attack.min_word_len", c.filter.min_word_len);
  c.filter.attack_stopwords = r.flag("attack.attack_stopwords", c.filter.attack_stopwords);
  c.pruthi_max_words = r.uint("attack.pruthi_k", c.pruthi_max_words);
  c.workers = r.uint("attack.workers", c.workers);
  c.out_dir = r.str("attack.out", c.out_dir);
  c.thesaurus_path = r.str("attack.thesaurus", c.thesaurus_path);

  {
    auto seeds = r.str_list("eval.fluctuation_seeds");
    for (const auto& s : seeds) {
      try {
        c.fluctuation_seeds.push_back(std::stoull(s));
      } catch (const std::exception&) {
        throw ConfigError("eval.fluctuation_seeds: bad entry '" + s + "'");
      }
    }
  }
  c.target_fpr = r.num("eval.target_fpr", c.target_fpr);

  c.seed_data = r.uint("seeds.data", c.seed_data);
  c.seed_model = r.uint("seeds.model", c.seed_model);
  c.seed_noise = r.uint("seeds.noise", c.seed_noise);
  c.seed_attack = r.uint("seeds.attack", c.seed_attack);

  r.finish();

  // Resolve training objective from mode and ablation.
  if (c.train_mode == "scrn") {
    AblationDeltas deltas = build_ablation(parse_ablation(c.ablation));
    const double dropout = c.flags.dropout_rate;
    TrainingObjective obj = c.objective;
    apply_ablation(deltas, c.model, c.flags, c.loss, obj);
    c.objective = obj;
    if (!deltas.flags.dropout_repr) c.flags.dropout_rate = dropout;
  } else if (c.train_mode == "flooding") {
    if (c.ablation != "SCRN") {
      throw ConfigError("train.mode=flooding conflicts with ablation=" + c.ablation);
    }
    c.objective = TrainingObjective::flooding;
    c.flags.reconstruction = false;
    c.flags.dropout_repr = false;
    if (!c.loss.flood_level) {
      throw ConfigError("train.mode=flooding requires loss.flood_level (no default)");
    }
  } else if (c.train_mode == "rdrop") {
    if (c.ablation != "SCRN") {
      throw ConfigError("train.mode=rdrop conflicts with ablation=" + c.ablation);
    }
    c.objective = TrainingObjective::rdrop;
    c.flags.reconstruction = false;
    c.flags.dropout_repr = true;
    if (!c.loss.rdrop_weight) {
      throw ConfigError("train.mode=rdrop requires loss.rdrop_weight (no default)");
    }
  } else {
    throw ConfigError("train.mode must be scrn, flooding or rdrop");
  }

  c.model.finalize();
  c.model.validate();
  c.loss.validate();
  c.budget.validate();
  if (c.method != "scrn" && c.method != "log-likelihood" && c.method != "log-rank" &&
      c.method != "entropy" && c.method != "gltr") {
    throw ConfigError("method must be scrn or a metric detector name");
  }
  return c;
}

namespace {
std::string num_str(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}
}  // namespace

std::map<std::string, std::string> ExperimentConfig::echo() const {
  std::map<std::string, std::string> kv;
  kv["data.format"] = data_format;
  kv["data.path"] = data_path;
  kv["data.out"] = data_out;
  kv["scenario"] = scenario;
  kv["data.train_fraction"] = num_str(train_fraction);
  kv["data.synthetic_train"] = std::to_string(synthetic_train);
  kv["data.synthetic_test"] = std::to_string(synthetic_test);
  kv["method"] = method;
  kv["model.d"] = std::to_string(model.d);
  kv["model.d_z"] = std::to_string(model.d_z);
  kv["model.encoder"] = model.encoder.kind;
  kv["model.layers"] = std::to_string(model.encoder.toy.layers);
  kv["model.heads"] = std::to_string(model.encoder.toy.heads);
  kv["model.ffn"] = std::to_string(model.encoder.toy.ffn);
  kv["model.max_len"] = std::to_string(model.encoder.toy.max_len);
  kv["model.noise_mode"] = noise_mode_name(model.noise_mode);
  kv["ablation"] = ablation;
  kv["train.mode"] = train_mode;
  kv["loss.alpha"] = num_str(loss.alpha);
  kv["loss.beta"] = num_str(loss.beta);
  kv["loss.lambda1"] = num_str(loss.lambda1);
  kv["loss.lambda2"] = num_str(loss.lambda2);
  kv["loss.lambda3"] = num_str(loss.lambda3);
  kv["train.batch"] = std::to_string(batch);
  kv["train.epochs"] = std::to_string(epochs);
  kv["train.lr"] = num_str(lr);
  kv["train.weight_decay"] = num_str(weight_decay);
  kv["seeds.data"] = std::to_string(seed_data);
  kv["seeds.model"] = std::to_string(seed_model);
  kv["seeds.noise"] = std::to_string(seed_noise);
  kv["seeds.attack"] = std::to_string(seed_attack);
  return kv;
}

}  // namespace scrn
