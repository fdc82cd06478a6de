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

#include "scrn/model.hpp"

#include <cmath>

namespace scrn {

NoiseMode parse_noise_mode(std::string_view s) {
  if (s == "sample") return NoiseMode::sample;
  if (s == "zero") return NoiseMode::zero;
  if (s == "fixed-seed") return NoiseMode::fixed_seed;
  throw ConfigError("unknown noise mode: '" + std::string(s) + "'");
}

std::string noise_mode_name(NoiseMode m) {
  switch (m) {
    case NoiseMode::sample: return "sample";
    case NoiseMode::zero: return "zero";
    case NoiseMode::fixed_seed: return "fixed-seed";
  }
  return "?";
}

void LatentSplit::validate() const {
  if (z_s.rows != z.rows || z_p.rows != z.rows || z_p.cols != 1) {
    throw InputError("LatentSplit: component counts do not match");
  }
  if (!z.all_finite() || !z_s.all_finite() || !z_p.all_finite()) {
    throw NumericError("LatentSplit: non-finite entries");
  }
}

Mat NoiseSample::column() const {
  Mat m(values.size(), 1);
  m.a = values;
  return m;
}

NoiseSample draw_noise(size_t n, uint64_t seed, NoiseGranularity granularity) {
  NoiseSample s;
  s.seed = seed;
  s.values.resize(n);
  Rng rng(seed);
  if (granularity == NoiseGranularity::per_sequence) {
    const double e = rng.normal();
    std::fill(s.values.begin(), s.values.end(), e);
  } else {
    for (double& v : s.values) v = rng.normal();
  }
  return s;
}

NoiseSample zero_noise(size_t n) {
  NoiseSample s;
  s.seed = 0;
  s.values.assign(n, 0.0);
  return s;
}

void ModelConfig::finalize() {
  if (encoder.kind == "toy") {
    encoder.toy.d = d;
  }
  if (mlp_enc_layers.empty()) mlp_enc_layers = {d, (d + d_z) / 2, d_z};
  if (mlp_dec_layers.empty()) mlp_dec_layers = {d_z, (d + d_z) / 2, d};
  if (classifier_layers.empty()) classifier_layers = {d, d / 2 < 2 ? 2 : d / 2, 2};
}

void ModelConfig::validate() const {
  if (d == 0 || d_z == 0) throw ConfigError("model dims must be positive");
  if (d_z > d) throw ConfigError("d_z must not exceed d");
  auto check_list = [](const std::vector<size_t>& l, size_t in, size_t out,
                       const char* name) {
    if (l.size() < 2) throw ConfigError(std::string(name) + ": need at least two sizes");
    if (l.front() != in || l.back() != out) {
      throw ConfigError(std::string(name) + ": ends must be " + std::to_string(in) +
                        " and " + std::to_string(out));
    }
    for (size_t s : l) {
      if (s == 0) throw ConfigError(std::string(name) + ": zero layer size");
    }
  };
  check_list(mlp_enc_layers, d, d_z, "mlp_enc_layers");
  check_list(mlp_dec_layers, d_z, d, "mlp_dec_layers");
  check_list(classifier_layers, d, 2, "classifier_layers");
  if (encoder.kind == "toy") {
    if (encoder.toy.d != d) throw ConfigError("toy encoder dim must equal model d");
    if (encoder.toy.heads == 0 || encoder.toy.d % encoder.toy.heads != 0) {
      throw ConfigError("toy encoder: d must be divisible by heads");
    }
  }
}

ModelConfig ModelConfig::toy_default() {
  ModelConfig c;
  c.d = 64;
  c.d_z = 32;
  c.encoder.kind = "toy";
  c.encoder.toy = ToyEncoderShape{};
  c.finalize();
  return c;
}

ModelConfig ModelConfig::pretrained_default() {
  ModelConfig c;
  c.d = 768;
  c.d_z = 512;
  c.encoder.kind = "pretrained:roberta-base";
  c.finalize();
  return c;
}

Label argmax_label(const std::array<double, 2>& dist) {
  // Exact tie predicts human.
  return dist[1] > dist[0] ? Label::ai : Label::human;
}

void validate_distribution(const std::array<double, 2>& dist) {
  if (!(dist[0] >= 0.0) || !(dist[1] >= 0.0) ||
      std::abs(dist[0] + dist[1] - 1.0) > 1e-6) {
    throw InputError("invalid class distribution");
  }
}

SCRNModel::SCRNModel(ModelConfig cfg, VariantFlags flags, size_t vocab_size,
                     uint64_t init_seed)
    : cfg_(std::move(cfg)), flags_(flags), vocab_size_(vocab_size) {
  cfg_.finalize();
  cfg_.validate();
  if (cfg_.encoder.kind != "toy") {
    throw ConfigError("encoder kind '" + cfg_.encoder.kind +
                      "' has no bundled weights; use the 'toy' encoder");
  }
  Rng rng(init_seed);
  encoder_ = std::make_unique<ToyTransformerEncoder>(store_, cfg_.encoder.toy,
                                                     vocab_size_, rng);
  if (flags_.reconstruction) {
    enc_mlp_ = Mlp::create(store_, "re.enc", cfg_.mlp_enc_layers, rng);
    w_s_ = &store_.create("re.w_s", cfg_.d_z, cfg_.d_z);
    b_s_ = &store_.create("re.b_s", 1, cfg_.d_z);
    w_p_ = &store_.create("re.w_p", cfg_.d_z, 1);
    b_p_ = &store_.create("re.b_p", 1, 1);
    {
      const double s = std::sqrt(1.0 / static_cast<double>(cfg_.d_z));
      for (double& v : w_s_->value.a) v = rng.normal() * s;
      for (double& v : w_p_->value.a) v = rng.normal() * s;
      // Start the perturbation magnitude near 1, inside the range the
      // regularizer prefers, instead of near the log singularity.
      b_p_->value.a[0] = 1.0;
    }
    dec_mlp_ = Mlp::create(store_, "re.dec", cfg_.mlp_dec_layers, rng);
  }
  classifier_ = Mlp::create(store_, "cls", cfg_.classifier_layers, rng);
}

TokenizedText SCRNModel::clip_to_encoder(const TokenizedText& text) const {
  text.validate();
  const size_t cap = encoder_->max_len();
  if (text.length() <= cap) return text;
  TokenizedText t = text;
  t.tokens.resize(cap);
  t.attention_mask.resize(cap);
  if (t.unmasked_count() == 0) {
    throw InputError("truncation removed every unmasked position");
  }
  truncations_.fetch_add(1, std::memory_order_relaxed);
  if (truncation_hook_) {
    truncation_hook_(TruncationEvent{fnv1a64(text.tokens), text.length(), cap});
  }
  return t;
}

TokenRepresentations SCRNModel::encode(const TokenizedText& text) const {
  TokenizedText t = clip_to_encoder(text);
  Graph g(false);
  Var h = encoder_->encode_vars(g, t.tokens, t.attention_mask);
  return h.val();
}

LatentSplit SCRNModel::latent_split(const TokenRepresentations& reps) const {
  if (!flags_.reconstruction) {
    throw ConfigError("latent_split: this variant has no reconstruction network");
  }
  if (reps.cols != cfg_.d) {
    throw ConfigError("latent_split: representation dim " + std::to_string(reps.cols) +
                      " does not match configured d=" + std::to_string(cfg_.d));
  }
  if (!reps.all_finite()) throw NumericError("latent_split: non-finite input");
  Graph g(false);
  Var h = g.constant(reps);
  Var z = enc_mlp_.apply(g, h);
  Var z_s = g.add_rowvec(g.matmul(z, leaf_of(g, *w_s_)), leaf_of(g, *b_s_));
  Var z_p = g.add_rowvec(g.matmul(z, leaf_of(g, *w_p_)), leaf_of(g, *b_p_));
  LatentSplit out{z.val(), z_s.val(), z_p.val()};
  out.validate();
  return out;
}

Mat SCRNModel::inject_noise(const LatentSplit& latent, const NoiseSample& noise) {
  if (noise.values.size() != latent.length()) {
    throw InputError("inject_noise: noise length " + std::to_string(noise.values.size()) +
                     " does not match token count " + std::to_string(latent.length()));
  }
  Graph g(false);
  return g.inject_noise(g.constant(latent.z_s), g.constant(latent.z_p), noise.column()).val();
}

Mat SCRNModel::reconstruct(const Mat& noisy_latent) const {
  if (!flags_.reconstruction) {
    throw ConfigError("reconstruct: this variant has no reconstruction network");
  }
  if (noisy_latent.cols != cfg_.d_z) {
    throw ConfigError("reconstruct: latent dim mismatch");
  }
  for (size_t r = 0; r < noisy_latent.rows; ++r) {
    const double* row = noisy_latent.row_ptr(r);
    for (size_t c = 0; c < noisy_latent.cols; ++c) {
      if (!std::isfinite(row[c])) {
        throw NumericError("reconstruct: non-finite latent at token " + std::to_string(r));
      }
    }
  }
  Graph g(false);
  return dec_mlp_.apply(g, g.constant(noisy_latent)).val();
}

std::pair<std::array<double, 2>, Label> SCRNModel::pool_and_classify(
    const Mat& reconstructed, const std::vector<uint8_t>& mask) const {
  Graph g(false);
  Var pooled = g.maxpool_rows(g.constant(reconstructed), mask);
  Var probs = g.softmax_rows(classifier_.apply(g, pooled));
  std::array<double, 2> dist{probs.val().a[0], probs.val().a[1]};
  return {dist, argmax_label(dist)};
}

SCRNModel::BranchVars SCRNModel::forward_vars(Graph& g, const TokenizedText& text,
                                              const NoiseSample& noise,
                                              Rng* dropout_rng) const {
  TokenizedText t = clip_to_encoder(text);
  BranchVars out;
  out.mask = t.attention_mask;
  out.noise = noise;
  out.h = encoder_->encode_vars(g, t.tokens, t.attention_mask);
  if (flags_.reconstruction) {
    if (noise.values.size() != t.length()) {
      throw InputError("forward: noise length does not match (possibly truncated) input");
    }
    out.z = enc_mlp_.apply(g, out.h);
    out.z_s = g.add_rowvec(g.matmul(out.z, leaf_of(g, *w_s_)), leaf_of(g, *b_s_));
    out.z_p = g.add_rowvec(g.matmul(out.z, leaf_of(g, *w_p_)), leaf_of(g, *b_p_));
    out.z_tilde = g.inject_noise(out.z_s, out.z_p, noise.column());
    out.h_re = dec_mlp_.apply(g, out.z_tilde);
  } else if (flags_.dropout_repr && dropout_rng != nullptr) {
    out.h_re = g.dropout(out.h, flags_.dropout_rate, *dropout_rng);
  } else {
    out.h_re = out.h;
  }
  Var pooled = g.maxpool_rows(out.h_re, t.attention_mask);
  out.probs = g.softmax_rows(classifier_.apply(g, pooled));
  return out;
}

NoiseSample SCRNModel::noise_for(const TokenizedText& text, NoiseMode mode) const {
  TokenizedText t = clip_to_encoder(text);
  switch (mode) {
    case NoiseMode::zero:
      return zero_noise(t.length());
    case NoiseMode::fixed_seed:
      return draw_noise(t.length(), cfg_.fixed_noise_seed, cfg_.noise_granularity);
    case NoiseMode::sample:
      return draw_noise(t.length(), mix_seed(inference_seed_, fnv1a64(t.tokens)),
                        cfg_.noise_granularity);
  }
  throw ConfigError("unreachable noise mode");
}

BranchOutput SCRNModel::forward_with_noise(const TokenizedText& text,
                                           const NoiseSample& noise) const {
  Graph g(false);
  BranchVars bv = forward_vars(g, text, noise, nullptr);
  BranchOutput out;
  out.class_distribution = {bv.probs.val().a[0], bv.probs.val().a[1]};
  out.predicted_label = argmax_label(out.class_distribution);
  out.reconstructed = bv.h_re.val();
  if (flags_.reconstruction) {
    out.latent = LatentSplit{bv.z.val(), bv.z_s.val(), bv.z_p.val()};
  }
  out.noise = noise;
  return out;
}

BranchOutput SCRNModel::forward(const TokenizedText& text, NoiseMode mode) const {
  return forward_with_noise(text, noise_for(text, mode));
}

std::pair<BranchOutput, BranchOutput> SCRNModel::forward_siamese(
    const TokenizedText& text, uint64_t seed_a, uint64_t seed_b) const {
  TokenizedText t = clip_to_encoder(text);
  const NoiseSample na = draw_noise(t.length(), seed_a, cfg_.noise_granularity);
  const NoiseSample nb = draw_noise(t.length(), seed_b, cfg_.noise_granularity);
  return {forward_with_noise(t, na), forward_with_noise(t, nb)};
}

}  // namespace scrn
