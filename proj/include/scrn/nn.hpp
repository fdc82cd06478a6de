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

#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "scrn/graph.hpp"

namespace scrn {

// Owns every Param of a model in creation order. Creation order doubles as
// the serialization order of the checkpoint parameter blob, so module
// construction must be deterministic.
class ParamStore {
 public:
  Param& create(const std::string& name, size_t rows, size_t cols);
  std::vector<Param*> all() const;
  size_t total_size() const;
  void zero_grads() const;

 private:
  // deque keeps addresses stable as params are added.
  mutable std::deque<Param> params_;
};

// Helper building an eval-or-train graph leaf from a parameter. Eval-mode
// graphs never write through the pointer, which keeps const forward passes
// safe to run concurrently.
Var leaf_of(Graph& g, const Param& p);

struct Linear {
  Param* W = nullptr;  // in x out
  Param* b = nullptr;  // 1 x out

  static Linear create(ParamStore& store, const std::string& name, size_t in,
                       size_t out, Rng& rng);
  Var apply(Graph& g, Var x) const;
};

// Feed-forward stack over a layer-size list [a0, a1, ..., ak] with GELU
// between layers and a linear final layer.
struct Mlp {
  std::vector<Linear> layers;

  static Mlp create(ParamStore& store, const std::string& name,
                    const std::vector<size_t>& sizes, Rng& rng);
  Var apply(Graph& g, Var x) const;
  size_t in_dim() const;
  size_t out_dim() const;
};

struct LayerNorm {
  Param* gamma = nullptr;
  Param* beta = nullptr;

  static LayerNorm create(ParamStore& store, const std::string& name, size_t d);
  Var apply(Graph& g, Var x) const;
};

// Contract any contextual encoder must satisfy: token ids in, one d-dim
// vector per position out. The bundled implementation is a small trainable
// transformer; a pretrained encoder can be plugged in behind the same
// interface.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual size_t dim() const = 0;
  virtual size_t max_len() const = 0;
  virtual size_t vocab_size() const = 0;
  // ids/mask must already fit max_len; deterministic in evaluation mode.
  virtual Var encode_vars(Graph& g, const std::vector<int>& ids,
                          const std::vector<uint8_t>& mask) const = 0;
};

struct ToyEncoderShape {
  size_t layers = 2;
  size_t heads = 4;
  size_t d = 64;
  size_t ffn = 128;
  size_t max_len = 64;
};

// From-scratch pre-norm transformer encoder, small enough to train on a CPU
// in minutes. No dropout: stochastic regularization belongs to the training
// modes that ask for it.
class ToyTransformerEncoder : public Encoder {
 public:
  ToyTransformerEncoder(ParamStore& store, const ToyEncoderShape& shape,
                        size_t vocab_size, Rng& rng);

  size_t dim() const override { return shape_.d; }
  size_t max_len() const override { return shape_.max_len; }
  size_t vocab_size() const override { return vocab_size_; }
  Var encode_vars(Graph& g, const std::vector<int>& ids,
                  const std::vector<uint8_t>& mask) const override;

 private:
  struct Layer {
    LayerNorm ln1, ln2;
    Linear q, k, v, o;
    Linear ffn1, ffn2;
  };

  ToyEncoderShape shape_;
  size_t vocab_size_;
  Param* tok_emb_ = nullptr;
  Param* pos_emb_ = nullptr;
  std::vector<Layer> layers_;
  LayerNorm final_ln_;
};

}  // namespace scrn
