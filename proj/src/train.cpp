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

#include "scrn/train.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace scrn {

using nlohmann::json;

namespace {

struct EncodedSet {
  std::vector<TokenizedText> texts;
};

double accuracy(const SCRNModel& model, const EncodedSet& set) {
  if (set.texts.empty()) return 0.0;
  size_t correct = 0;
  for (const TokenizedText& t : set.texts) {
    const BranchOutput out = model.forward(t, model.config().noise_mode);
    if (out.predicted_label == t.label) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(set.texts.size());
}

}  // namespace

TrainOutcome train_model(const ExperimentConfig& cfg, const Corpus& corpus) {
  const std::vector<size_t> train_idx = corpus.indices(Split::train);
  if (train_idx.empty()) throw InputError("train: corpus has no train split");

  std::vector<std::string> train_texts;
  train_texts.reserve(train_idx.size());
  for (size_t i : train_idx) train_texts.push_back(corpus.records[i].text);
  const WordTokenizer tokenizer = WordTokenizer::fit(train_texts);

  SCRNModel model(cfg.model, cfg.flags, tokenizer.vocab().size(), cfg.seed_model);
  model.set_inference_seed(cfg.seed_noise);

  // Validation carve-out from the train split (never from test).
  std::vector<size_t> order = train_idx;
  {
    Rng rng(mix_seed(cfg.seed_data, 0x7a11));
    rng.shuffle(order);
  }
  const size_t n_val = std::min(
      order.size() > 1 ? order.size() - 1 : size_t{0},
      static_cast<size_t>(std::floor(cfg.val_fraction * double(order.size()))));
  EncodedSet val, train;
  for (size_t k = 0; k < order.size(); ++k) {
    const CorpusRecord& r = corpus.records[order[k]];
    (k < n_val ? val : train)
        .texts.push_back(tokenizer.encode(r.text, r.label, r.source_tag));
  }

  const size_t n_train = train.texts.size();
  const size_t batches_per_epoch = (n_train + cfg.batch - 1) / cfg.batch;
  const size_t total_steps = cfg.epochs * batches_per_epoch;

  AdamW optimizer(model.params(), {.lr = cfg.lr, .weight_decay = cfg.weight_decay});
  Rng noise_rng(cfg.seed_noise);

  std::ofstream runlog(cfg.runlog, std::ios::trunc);
  if (!runlog) throw IoError("cannot write run log " + cfg.runlog);

  const std::filesystem::path ckpt_root(cfg.checkpoint_dir);
  const std::filesystem::path latest_dir = ckpt_root / "latest";
  const std::filesystem::path best_dir = ckpt_root / "best";
  CheckpointManifest manifest;
  manifest.build = build_id();
  manifest.config_echo = cfg.echo();

  TrainOutcome outcome;
  outcome.latest_dir = latest_dir;
  outcome.best_dir = best_dir;

  const bool two_branch = cfg.objective == TrainingObjective::siamese ||
                          cfg.objective == TrainingObjective::rdrop;
  size_t step = 0;
  double best_val = -1.0;

  auto save_latest = [&]() {
    manifest.step = step;
    manifest.best_val_accuracy = best_val;
    save_checkpoint(latest_dir, model, tokenizer.vocab(), manifest);
  };
  auto maybe_save_best = [&]() {
    const double val_acc = val.texts.empty() ? accuracy(model, train) : accuracy(model, val);
    if (val_acc > best_val) {
      best_val = val_acc;
      manifest.step = step;
      manifest.best_val_accuracy = best_val;
      save_checkpoint(best_dir, model, tokenizer.vocab(), manifest);
    }
  };

  std::vector<size_t> batch_order(n_train);
  for (size_t i = 0; i < n_train; ++i) batch_order[i] = i;

  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(cfg.seed_data, 0xe90c + epoch));
    shuffle_rng.shuffle(batch_order);
    for (size_t b = 0; b < batches_per_epoch; ++b) {
      const uint64_t step_seed = mix_seed(noise_rng.next_u64(), step);
      Graph g(true);
      std::vector<TextLossVars> text_losses_batch;
      Rng dropout_rng(mix_seed(step_seed, 0xd20));
      const size_t begin = b * cfg.batch;
      const size_t end = std::min(begin + cfg.batch, n_train);
      std::vector<std::pair<SCRNModel::BranchVars, SCRNModel::BranchVars>> branches;
      branches.reserve(end - begin);
      LossBreakdown breakdown;
      Var total;
      try {
        for (size_t k = begin; k < end; ++k) {
          const TokenizedText& text = train.texts[batch_order[k]];
          const TokenizedText clipped = model.clip_to_encoder(text);
          NoiseSample na = zero_noise(clipped.length());
          NoiseSample nb = zero_noise(clipped.length());
          if (cfg.model.noise_mode != NoiseMode::zero && cfg.flags.reconstruction) {
            na = draw_noise(clipped.length(), mix_seed(step_seed, 2 * k),
                            cfg.model.noise_granularity);
            nb = draw_noise(clipped.length(), mix_seed(step_seed, 2 * k + 1),
                            cfg.model.noise_granularity);
          }
          branches.emplace_back(model.forward_vars(g, clipped, na, &dropout_rng),
                                SCRNModel::BranchVars{});
          if (two_branch) {
            branches.back().second = model.forward_vars(g, clipped, nb, &dropout_rng);
          }
          text_losses_batch.push_back(
              text_losses(g, branches.back().first,
                          two_branch ? &branches.back().second : nullptr,
                          clipped.label, cfg.loss, cfg.objective));
        }
        total = combine_losses(g, text_losses_batch, cfg.loss, cfg.objective,
                               &breakdown);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at step " + std::to_string(step) + ": " +
                           e.what());
      }
      if (!std::isfinite(breakdown.l_all)) {
        throw NumericError("training diverged at step " + std::to_string(step));
      }
      g.backward(total);
      optimizer.step(linear_decay(step, total_steps));
      ++step;

      runlog << json{{"step", step},
                     {"l_cls", breakdown.l_cls},
                     {"l_re", breakdown.l_re},
                     {"l_sc", breakdown.l_sc},
                     {"l_all", breakdown.l_all},
                     {"seed", step_seed}}
                    .dump()
             << '\n';
      runlog.flush();
    }
    maybe_save_best();
    save_latest();
  }

  outcome.final_train_accuracy = accuracy(model, train);
  outcome.best_val_accuracy = best_val;
  outcome.steps = step;
  manifest.final_train_accuracy = outcome.final_train_accuracy;
  if (cfg.epochs == 0) {
    // Zero training steps: the checkpoint is the initialization.
    maybe_save_best();
  }
  save_latest();
  outcome.best_val_accuracy = best_val;
  return outcome;
}

TrainOutcome train_metric_detector(const ExperimentConfig& cfg, const Corpus& corpus) {
  std::vector<std::string> texts;
  std::vector<Label> labels;
  for (size_t i : corpus.indices(Split::train)) {
    texts.push_back(corpus.records[i].text);
    labels.push_back(corpus.records[i].label);
  }
  if (texts.empty()) throw InputError("train: corpus has no train split");
  MetricDetector det =
      MetricDetector::train(texts, labels, parse_detector_feature(cfg.method));
  const std::filesystem::path dir = std::filesystem::path(cfg.checkpoint_dir) / "latest";
  save_metric_detector(dir, det);

  size_t correct = 0;
  for (size_t i = 0; i < texts.size(); ++i) {
    if (det.predict(texts[i]).second == labels[i]) ++correct;
  }
  TrainOutcome outcome;
  outcome.final_train_accuracy = 100.0 * double(correct) / double(texts.size());
  outcome.latest_dir = dir;
  outcome.best_dir = dir;
  return outcome;
}

TrainOutcome train_from_config(const ExperimentConfig& cfg, const Corpus& corpus) {
  if (cfg.method == "scrn") return train_model(cfg, corpus);
  return train_metric_detector(cfg, corpus);
}

}  // namespace scrn
