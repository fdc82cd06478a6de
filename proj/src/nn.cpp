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

#include "scrn/nn.hpp"

#include <cmath>

namespace scrn {

Param& ParamStore::create(const std::string& name, size_t rows, size_t cols) {
  params_.emplace_back(name, Mat(rows, cols));
  return params_.back();
}

std::vector<Param*> ParamStore::all() const {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (Param& p : params_) out.push_back(&p);
  return out;
}

size_t ParamStore::total_size() const {
  size_t n = 0;
  for (const Param& p : params_) n += p.size();
  return n;
}

void ParamStore::zero_grads() const {
  for (Param& p : params_) p.zero_grad();
}

Var leaf_of(Graph& g, const Param& p) {
  // The leaf only mutates Param::grad, and only when backward() runs on a
  // tracking graph.
  return g.leaf(const_cast<Param&>(p));
}

namespace {
void xavier_init(Mat& m, Rng& rng) {
  const double s = std::sqrt(2.0 / static_cast<double>(m.rows + m.cols));
  for (double& v : m.a) v = rng.normal() * s;
}
}  // namespace

Linear Linear::create(ParamStore& store, const std::string& name, size_t in,
                      size_t out, Rng& rng) {
  Linear l;
  l.W = &store.create(name + ".W", in, out);
  l.b = &store.create(name + ".b", 1, out);
  xavier_init(l.W->value, rng);
  return l;
}

Var Linear::apply(Graph& g, Var x) const {
  return g.add_rowvec(g.matmul(x, leaf_of(g, *W)), leaf_of(g, *b));
}

Mlp Mlp::create(ParamStore& store, const std::string& name,
                const std::vector<size_t>& sizes, Rng& rng) {
  if (sizes.size() < 2) throw ConfigError("MLP '" + name + "' needs at least two sizes");
  Mlp m;
  for (size_t i = 0; i + 1 < sizes.size(); ++i) {
    m.layers.push_back(Linear::create(store, name + ".l" + std::to_string(i),
                                      sizes[i], sizes[i + 1], rng));
  }
  return m;
}

Var Mlp::apply(Graph& g, Var x) const {
  for (size_t i = 0; i < layers.size(); ++i) {
    x = layers[i].apply(g, x);
    if (i + 1 < layers.size()) x = g.gelu(x);
  }
  return x;
}

size_t Mlp::in_dim() const { return layers.front().W->value.rows; }
size_t Mlp::out_dim() const { return layers.back().W->value.cols; }

LayerNorm LayerNorm::create(ParamStore& store, const std::string& name, size_t d) {
  LayerNorm ln;
  ln.gamma = &store.create(name + ".gamma", 1, d);
  ln.beta = &store.create(name + ".beta", 1, d);
  ln.gamma->value.fill(1.0);
  return ln;
}

Var LayerNorm::apply(Graph& g, Var x) const {
  return g.layer_norm_rows(x, leaf_of(g, *gamma), leaf_of(g, *beta));
}

ToyTransformerEncoder::ToyTransformerEncoder(ParamStore& store,
                                             const ToyEncoderShape& shape,
                                             size_t vocab_size, Rng& rng)
    : shape_(shape), vocab_size_(vocab_size) {
  if (shape_.d % shape_.heads != 0) {
    throw ConfigError("encoder dim must be divisible by head count");
  }
  tok_emb_ = &store.create("enc.tok_emb", vocab_size, shape_.d);
  pos_emb_ = &store.create("enc.pos_emb", shape_.max_len, shape_.d);
  for (double& v : tok_emb_->value.a) v = rng.normal() * 0.02;
  for (double& v : pos_emb_->value.a) v = rng.normal() * 0.02;
  for (size_t l = 0; l < shape_.layers; ++l) {
    const std::string p = "enc.layer" + std::to_string(l);
    Layer layer;
    layer.ln1 = LayerNorm::create(store, p + ".ln1", shape_.d);
    layer.q = Linear::create(store, p + ".q", shape_.d, shape_.d, rng);
    layer.k = Linear::create(store, p + ".k", shape_.d, shape_.d, rng);
    layer.v = Linear::create(store, p + ".v", shape_.d, shape_.d, rng);
    layer.o = Linear::create(store, p + ".o", shape_.d, shape_.d, rng);
    layer.ln2 = LayerNorm::create(store, p + ".ln2", shape_.d);
    layer.ffn1 = Linear::create(store, p + ".ffn1", shape_.d, shape_.ffn, rng);
    layer.ffn2 = Linear::create(store, p + ".ffn2", shape_.ffn, shape_.d, rng);
    layers_.push_back(layer);
  }
  final_ln_ = LayerNorm::create(store, "enc.final_ln", shape_.d);
}

Var ToyTransformerEncoder::encode_vars(Graph& g, const std::vector<int>& ids,
                                       const std::vector<uint8_t>& mask) const {
  const size_t n = ids.size();
  if (n == 0) throw InputError("encoder: empty input");
  if (n > shape_.max_len) throw InputError("encoder: sequence exceeds max length");
  for (int id : ids) {
    if (id < 0 || static_cast<size_t>(id) >= vocab_size_) {
      throw InputError("encoder: token id " + std::to_string(id) +
                       " outside vocabulary of size " + std::to_string(vocab_size_));
    }
  }
  std::vector<int> positions(n);
  for (size_t i = 0; i < n; ++i) positions[i] = static_cast<int>(i);

  Var x = g.add(g.rows_gather(leaf_of(g, *tok_emb_), ids),
                g.rows_gather(leaf_of(g, *pos_emb_), positions));

  bool any_masked = false;
  for (uint8_t m : mask) any_masked = any_masked || !m;
  Var key_mask;  // n x n additive mask blocking attention to masked keys
  if (any_masked) {
    Mat km(n, n);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        if (!mask[j]) km.at(i, j) = -1e30;
      }
    }
    key_mask = g.constant(std::move(km));
  }

  const size_t dh = shape_.d / shape_.heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (const Layer& layer : layers_) {
    Var xn = layer.ln1.apply(g, x);
    Var Q = layer.q.apply(g, xn);
    Var K = layer.k.apply(g, xn);
    Var V = layer.v.apply(g, xn);
    std::vector<Var> heads;
    heads.reserve(shape_.heads);
    for (size_t h = 0; h < shape_.heads; ++h) {
      const size_t c0 = h * dh, c1 = (h + 1) * dh;
      Var scores = g.scale(g.matmul_nt(g.slice_cols(Q, c0, c1), g.slice_cols(K, c0, c1)),
                           att_scale);
      if (key_mask.valid()) scores = g.add(scores, key_mask);
      Var probs = g.softmax_rows(scores);
      heads.push_back(g.matmul(probs, g.slice_cols(V, c0, c1)));
    }
    Var att = layer.o.apply(g, g.concat_cols(heads));
    x = g.add(x, att);
    Var xf = layer.ln2.apply(g, x);
    Var ff = layer.ffn2.apply(g, g.gelu(layer.ffn1.apply(g, xf)));
    x = g.add(x, ff);
  }
  return final_ln_.apply(g, x);
}

}  // namespace scrn
