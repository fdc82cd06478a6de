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
#include <functional>
#include <string>
#include <vector>

#include "scrn/common.hpp"
#include "scrn/mat.hpp"

namespace scrn {

// A trainable tensor. Gradients accumulate into `grad` across a batch;
// the optimizer consumes and clears them.
struct Param {
  std::string name;
  Mat value;
  Mat grad;

  Param() = default;
  Param(std::string n, Mat v) : name(std::move(n)), value(std::move(v)) {
    grad = Mat(value.rows, value.cols);
  }
  void zero_grad() { grad.fill(0.0); }
  size_t size() const { return value.size(); }
};

class Graph;

// Handle into a Graph's tape. Cheap to copy; valid while the Graph lives.
struct Var {
  int id = -1;
  Graph* g = nullptr;

  bool valid() const { return id >= 0; }
  const Mat& val() const;
  // Scalar convenience for 1x1 vars.
  double scalar() const;
};

// Reverse-mode autodiff over Mat values, one tape per forward pass.
// Construct with track_grads=false for inference: values are computed but
// no tape is kept, which keeps victim queries cheap during attacks.
class Graph {
 public:
  explicit Graph(bool track_grads = true) : track_(track_grads) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool tracking() const { return track_; }

  Var constant(Mat v);
  Var leaf(Param& p);

  // Elementwise / broadcast arithmetic.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var add_rowvec(Var a, Var b);  // b is 1 x cols, broadcast over rows
  Var scale(Var a, double c);

  // Linear algebra.
  Var matmul(Var a, Var b);     // a (n x k) * b (k x m)
  Var matmul_nt(Var a, Var b);  // a (n x k) * b^T (m x k) -> n x m
  Var slice_cols(Var a, size_t c0, size_t c1);
  Var concat_cols(const std::vector<Var>& parts);
  Var rows_gather(Var src, const std::vector<int>& indices);

  // Nonlinearities and normalization.
  Var relu(Var a);
  Var gelu(Var a);
  Var softmax_rows(Var a);
  Var layer_norm_rows(Var a, Var gamma, Var beta, double eps = 1e-5);
  // Inverted dropout; the mask is drawn from `rng` at build time so a
  // seeded generator makes the pass reproducible.
  Var dropout(Var a, double rate, Rng& rng);

  // Masked sequence reductions. `mask[i]` selects row i.
  Var maxpool_rows(Var a, const std::vector<uint8_t>& mask);
  Var masked_mse(Var a, Var b, const std::vector<uint8_t>& mask);

  // Latent-scale regularizer: mean over unmasked rows of
  // ||z_s_i||^2 + z_p_i^2 - alpha * log(max(|z_p_i|, floor)).
  Var latent_reg(Var z_s, Var z_p, const std::vector<uint8_t>& mask,
                 double alpha, double abs_floor);

  // out[i][k] = z_s[i][k] + eps[i] * z_p[i]; eps is a constant n x 1 column.
  Var inject_noise(Var z_s, Var z_p, const Mat& eps);

  // Scalar losses over probability rows (1 x C). `floor` clamps
  // probabilities before any log.
  Var cross_entropy(Var probs, int label_idx, double floor = 1e-12);
  Var symmetric_kl(Var p, Var q, double floor = 1e-12);

  // Weighted sum of scalar vars.
  Var weighted_sum(const std::vector<Var>& vs, const std::vector<double>& ws);
  // Flooding transform |a - level| + level on a scalar var.
  Var flood(Var a, double level);

  // Runs backprop from a scalar var, accumulating into Param::grad of every
  // leaf reachable from it.
  void backward(Var loss);

  const Mat& value(Var v) const { return nodes_[v.id].val; }

 private:
  struct Node {
    Mat val;
    Mat grad;
    bool needs = false;
    Param* param = nullptr;
    std::function<void(Graph&, const Mat&)> back;
  };

  friend struct Var;

  Var make(Mat val, bool needs, std::function<void(Graph&, const Mat&)> back);
  bool needs(Var v) const { return nodes_[v.id].needs; }
  Mat& grad_of(int id);
  void check_same_graph(Var a) const;

  bool track_;
  std::deque<Node> nodes_;
};

}  // namespace scrn
