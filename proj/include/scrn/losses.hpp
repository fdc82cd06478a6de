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

#include <functional>
#include <optional>

#include "scrn/model.hpp"

namespace scrn {

// Probability floor applied before every log in the losses. Keeps the
// symmetric KL finite: it diverges as one branch's confidence approaches 1.
constexpr double kProbFloor = 1e-12;
// |z_p| floor inside the regularizer's log term.
constexpr double kZpFloor = 1e-8;

struct LossHyperParams {
  double alpha = 2.0;    // log-barrier weight in the latent regularizer
  double beta = 0.5;     // regularizer mix weight inside L_re
  double lambda1 = 0.5;  // classification weight
  double lambda2 = 0.01; // reconstruction weight
  double lambda3 = 0.5;  // calibration weight
  std::optional<double> flood_level;   // flooding objective only, no default
  std::optional<double> rdrop_weight;  // rdrop objective only, no default

  void validate() const;
};

// How the branch losses combine into the optimized total.
//   siamese:       l1*(cls + cls') + l2*(re + re') + l3*sc
//   single_branch: l1*cls + l2*re
//   flooding:      |single_branch - b| + b
//   rdrop:         l1*(cls + cls') + rdrop_weight*sc   (dropout branches)
enum class TrainingObjective { siamese, single_branch, flooding, rdrop };

TrainingObjective parse_objective(std::string_view s);
std::string objective_name(TrainingObjective o);

struct LossBreakdown {
  double l_cls = 0, l_cls_prime = 0;
  double l_mse = 0, l_mse_prime = 0;
  double l_reg = 0, l_reg_prime = 0;
  double l_re = 0, l_re_prime = 0;
  double l_sc = 0;
  double l_all = 0;

  // Recomputes l_all from the parts; |l_all - recombination| must stay
  // within 1e-8 for the plain objectives.
  double recombination(const LossHyperParams& hp, TrainingObjective obj) const;
};

// --- value-level operations ---

double cross_entropy(const std::array<double, 2>& dist, Label label);
double mse_loss(const Mat& reconstructed, const Mat& originals,
                const std::vector<uint8_t>& mask);
double reg_loss(const LatentSplit& latent, const std::vector<uint8_t>& mask,
                double alpha);
// Per-text combination l_mse + beta * l_reg.
double reconstruction_loss(double l_mse, double l_reg, double beta);
// Batch mean of the per-text combinations.
double reconstruction_loss(const std::vector<double>& l_mse,
                           const std::vector<double>& l_reg, double beta);
double symmetric_kl(const std::array<double, 2>& p, const std::array<double, 2>& q);

// Value-level total loss over one text's two branches. `originals` are the
// encoder outputs the reconstructions are compared against (identical for
// both branches; only the noise differs).
LossBreakdown total_loss(const BranchOutput& branch_a, const BranchOutput& branch_b,
                         Label label, const Mat& originals,
                         const std::vector<uint8_t>& mask, const LossHyperParams& hp,
                         TrainingObjective objective = TrainingObjective::siamese);

// --- graph-level assembly shared by training and the value-level ops ---

struct TextLossVars {
  Var cls_a, cls_b;
  Var mse_a, mse_b;
  Var reg_a, reg_b;
  Var re_a, re_b;
  Var sc;
};

// branch_b may be empty (single-branch objectives).
TextLossVars text_losses(Graph& g, const SCRNModel::BranchVars& branch_a,
                         const SCRNModel::BranchVars* branch_b, Label label,
                         const LossHyperParams& hp, TrainingObjective objective);

// Averages per-text losses and recombines into the optimized scalar.
// Fills `out` (batch-mean components) when non-null.
Var combine_losses(Graph& g, const std::vector<TextLossVars>& texts,
                   const LossHyperParams& hp, TrainingObjective objective,
                   LossBreakdown* out);

// --- gradient verification ---

// Compares analytic gradients against central finite differences on
// `n_coords` randomly sampled parameter coordinates. `loss_fn` must be a
// deterministic function of the parameter values. Returns the maximum
// relative error, where relative error is |a - n| / max(|a|, |n|, 1).
// Intended for small configurations (d <= 16).
double gradient_check(const std::function<Var(Graph&)>& loss_fn,
                      const std::vector<Param*>& params, size_t n_coords = 64,
                      double step = 1e-5, uint64_t seed = 20260301);

}  // namespace scrn
