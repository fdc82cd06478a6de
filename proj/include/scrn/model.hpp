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

#include <array>
#include <atomic>
#include <functional>
#include <memory>
#include <optional>

#include "scrn/nn.hpp"
#include "scrn/tokenizer.hpp"

namespace scrn {

// Per-position contextual vectors, n x d.
using TokenRepresentations = Mat;

enum class NoiseMode { sample, zero, fixed_seed };
enum class NoiseGranularity { per_token, per_sequence };

NoiseMode parse_noise_mode(std::string_view s);
std::string noise_mode_name(NoiseMode m);

// The latent split behind noise injection: z is the low-dimensional code,
// z_s its semantic part (n x d_z) and z_p the per-token perturbation
// magnitude (n x 1).
struct LatentSplit {
  Mat z;
  Mat z_s;
  Mat z_p;

  size_t length() const { return z.rows; }
  void validate() const;
};

// Gaussian draws used by one forward pass, reproducible from the seed.
struct NoiseSample {
  std::vector<double> values;
  uint64_t seed = 0;

  Mat column() const;
};

NoiseSample draw_noise(size_t n, uint64_t seed,
                       NoiseGranularity granularity = NoiseGranularity::per_token);
NoiseSample zero_noise(size_t n);

// Everything one forward branch produced.
struct BranchOutput {
  std::array<double, 2> class_distribution{};  // [p_human, p_ai]
  Label predicted_label = Label::human;
  Mat reconstructed;    // n x d
  LatentSplit latent;   // empty for variants without the reconstruction net
  NoiseSample noise;
};

struct EncoderSpec {
  std::string kind = "toy";  // "toy" or "pretrained:<identifier>"
  ToyEncoderShape toy;
};

struct ModelConfig {
  size_t d = 64;
  size_t d_z = 32;
  EncoderSpec encoder;
  std::vector<size_t> mlp_enc_layers;    // d -> ... -> d_z
  std::vector<size_t> mlp_dec_layers;    // d_z -> ... -> d
  std::vector<size_t> classifier_layers; // d -> ... -> 2
  NoiseMode noise_mode = NoiseMode::sample;
  NoiseGranularity noise_granularity = NoiseGranularity::per_token;
  uint64_t fixed_noise_seed = 0;

  // Fills empty layer lists with one-hidden-layer defaults for d/d_z.
  void finalize();
  void validate() const;

  // Self-contained trainable configuration (2 layers, 4 heads, d=64).
  static ModelConfig toy_default();
  // Dimensions used with a full pretrained encoder (d=768, d_z=512).
  static ModelConfig pretrained_default();
};

// Architecture switches for ablations and baseline training modes.
struct VariantFlags {
  bool reconstruction = true;  // latent split + noise + decoder present
  bool dropout_repr = false;   // replace the reconstruction net by dropout on h
  double dropout_rate = 0.1;
};

struct TruncationEvent {
  uint64_t text_hash = 0;
  size_t original_len = 0;
  size_t truncated_to = 0;
};

// The detector. Forward passes are read-only over parameters and safe to
// run concurrently; training (gradient accumulation, optimizer steps) needs
// exclusive access.
class SCRNModel {
 public:
  SCRNModel(ModelConfig cfg, VariantFlags flags, size_t vocab_size,
            uint64_t init_seed);

  // --- the forward-pass stages ---
  TokenRepresentations encode(const TokenizedText& text) const;
  LatentSplit latent_split(const TokenRepresentations& reps) const;
  static Mat inject_noise(const LatentSplit& latent, const NoiseSample& noise);
  Mat reconstruct(const Mat& noisy_latent) const;
  std::pair<std::array<double, 2>, Label> pool_and_classify(
      const Mat& reconstructed, const std::vector<uint8_t>& mask) const;

  BranchOutput forward(const TokenizedText& text, NoiseMode mode) const;
  BranchOutput forward_with_noise(const TokenizedText& text,
                                  const NoiseSample& noise) const;
  std::pair<BranchOutput, BranchOutput> forward_siamese(
      const TokenizedText& text, uint64_t seed_a, uint64_t seed_b) const;

  // Graph-building branch used by both inference and training. When
  // `dropout_rng` is non-null and the variant calls for it, representation
  // dropout is active (training); otherwise the pass is deterministic.
  struct BranchVars {
    Var h;
    Var z, z_s, z_p, z_tilde;
    Var h_re;
    Var probs;  // 1 x 2
    NoiseSample noise;
    std::vector<uint8_t> mask;
  };
  BranchVars forward_vars(Graph& g, const TokenizedText& text,
                          const NoiseSample& noise, Rng* dropout_rng) const;

  // Draws the NoiseSample `forward` would use for this text in the given
  // mode. In `sample` mode, the seed is a pure function of the run-level
  // inference seed and the token ids, so predictions are reproducible and
  // independent of query order.
  NoiseSample noise_for(const TokenizedText& text, NoiseMode mode) const;

  // Truncates to the encoder maximum, recording a warning.
  TokenizedText clip_to_encoder(const TokenizedText& text) const;

  const ModelConfig& config() const { return cfg_; }
  const VariantFlags& variant() const { return flags_; }
  size_t vocab_size() const { return vocab_size_; }
  std::vector<Param*> params() const { return store_.all(); }
  size_t param_count() const { return store_.total_size(); }
  void zero_grads() const { store_.zero_grads(); }

  void set_inference_seed(uint64_t seed) { inference_seed_ = seed; }
  uint64_t inference_seed() const { return inference_seed_; }

  uint64_t truncation_count() const { return truncations_.load(); }
  void set_truncation_hook(std::function<void(const TruncationEvent&)> hook) {
    truncation_hook_ = std::move(hook);
  }

 private:
  ModelConfig cfg_;
  VariantFlags flags_;
  size_t vocab_size_;
  ParamStore store_;
  std::unique_ptr<Encoder> encoder_;
  Mlp enc_mlp_;
  Param* w_s_ = nullptr;  // d_z x d_z
  Param* b_s_ = nullptr;  // 1 x d_z
  Param* w_p_ = nullptr;  // d_z x 1
  Param* b_p_ = nullptr;  // 1 x 1
  Mlp dec_mlp_;
  Mlp classifier_;
  uint64_t inference_seed_ = 0;
  mutable std::atomic<uint64_t> truncations_{0};
  std::function<void(const TruncationEvent&)> truncation_hook_;
};

// Distribution helpers shared by model and detector victims.
Label argmax_label(const std::array<double, 2>& dist);
void validate_distribution(const std::array<double, 2>& dist);

}  // namespace scrn
