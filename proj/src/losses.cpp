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

#include "scrn/losses.hpp"

#include <cmath>

namespace scrn {

void LossHyperParams::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("loss.alpha must be > 0");
  if (beta < 0.0) throw ConfigError("loss.beta must be >= 0");
  if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0) {
    throw ConfigError("loss lambdas must be >= 0");
  }
  if (flood_level && *flood_level < 0.0) throw ConfigError("flood level must be >= 0");
  if (rdrop_weight && *rdrop_weight < 0.0) throw ConfigError("rdrop weight must be >= 0");
  if (flood_level && rdrop_weight) {
    throw ConfigError("flood_level and rdrop_weight are mutually exclusive");
  }
}

TrainingObjective parse_objective(std::string_view s) {
  if (s == "siamese" || s == "scrn") return TrainingObjective::siamese;
  if (s == "single" || s == "single-branch") return TrainingObjective::single_branch;
  if (s == "flooding") return TrainingObjective::flooding;
  if (s == "rdrop") return TrainingObjective::rdrop;
  throw ConfigError("unknown training objective: '" + std::string(s) + "'");
}

std::string objective_name(TrainingObjective o) {
  switch (o) {
    case TrainingObjective::siamese: return "siamese";
    case TrainingObjective::single_branch: return "single-branch";
    case TrainingObjective::flooding: return "flooding";
    case TrainingObjective::rdrop: return "rdrop";
  }
  return "?";
}

double LossBreakdown::recombination(const LossHyperParams& hp,
                                    TrainingObjective obj) const {
  switch (obj) {
    case TrainingObjective::siamese:
      return hp.lambda1 * (l_cls + l_cls_prime) + hp.lambda2 * (l_re + l_re_prime) +
             hp.lambda3 * l_sc;
    case TrainingObjective::single_branch:
      return hp.lambda1 * l_cls + hp.lambda2 * l_re;
    case TrainingObjective::flooding: {
      const double raw = hp.lambda1 * l_cls + hp.lambda2 * l_re;
      return std::abs(raw - *hp.flood_level) + *hp.flood_level;
    }
    case TrainingObjective::rdrop:
      return hp.lambda1 * (l_cls + l_cls_prime) + *hp.rdrop_weight * l_sc;
  }
  return 0.0;
}

namespace {
Var dist_const(Graph& g, const std::array<double, 2>& dist) {
  return g.constant(Mat::row({dist[0], dist[1]}));
}
}  // namespace

double cross_entropy(const std::array<double, 2>& dist, Label label) {
  validate_distribution(dist);
  Graph g(false);
  return g.cross_entropy(dist_const(g, dist), label_index(label), kProbFloor).scalar();
}

double mse_loss(const Mat& reconstructed, const Mat& originals,
                const std::vector<uint8_t>& mask) {
  Graph g(false);
  return g.masked_mse(g.constant(reconstructed), g.constant(originals), mask).scalar();
}

double reg_loss(const LatentSplit& latent, const std::vector<uint8_t>& mask,
                double alpha) {
  Graph g(false);
  return g.latent_reg(g.constant(latent.z_s), g.constant(latent.z_p), mask, alpha,
                      kZpFloor)
      .scalar();
}

double reconstruction_loss(double l_mse, double l_reg, double beta) {
  if (!std::isfinite(l_mse) || !std::isfinite(l_reg)) {
    throw NumericError("reconstruction_loss: non-finite component");
  }
  return l_mse + beta * l_reg;
}

double reconstruction_loss(const std::vector<double>& l_mse,
                           const std::vector<double>& l_reg, double beta) {
  if (l_mse.size() != l_reg.size() || l_mse.empty()) {
    throw InputError("reconstruction_loss: component lists must match and be nonempty");
  }
  double total = 0.0;
  for (size_t i = 0; i < l_mse.size(); ++i) {
    total += reconstruction_loss(l_mse[i], l_reg[i], beta);
  }
  return total / static_cast<double>(l_mse.size());
}

double symmetric_kl(const std::array<double, 2>& p, const std::array<double, 2>& q) {
  validate_distribution(p);
  validate_distribution(q);
  Graph g(false);
  return g.symmetric_kl(dist_const(g, p), dist_const(g, q), kProbFloor).scalar();
}

TextLossVars text_losses(Graph& g, const SCRNModel::BranchVars& branch_a,
                         const SCRNModel::BranchVars* branch_b, Label label,
                         const LossHyperParams& hp, TrainingObjective objective) {
  hp.validate();
  const bool two_branch = objective == TrainingObjective::siamese ||
                          objective == TrainingObjective::rdrop;
  if (two_branch && branch_b == nullptr) {
    throw ConfigError(objective_name(objective) + " objective needs two branches");
  }
  TextLossVars tl;
  const int li = label_index(label);
  tl.cls_a = g.cross_entropy(branch_a.probs, li, kProbFloor);
  const bool recon = branch_a.z_s.valid();
  if (recon && objective != TrainingObjective::rdrop) {
    tl.mse_a = g.masked_mse(branch_a.h_re, branch_a.h, branch_a.mask);
    tl.reg_a = g.latent_reg(branch_a.z_s, branch_a.z_p, branch_a.mask, hp.alpha, kZpFloor);
    tl.re_a = g.weighted_sum({tl.mse_a, tl.reg_a}, {1.0, hp.beta});
  }
  if (two_branch) {
    tl.cls_b = g.cross_entropy(branch_b->probs, li, kProbFloor);
    if (branch_b->z_s.valid() && objective != TrainingObjective::rdrop) {
      tl.mse_b = g.masked_mse(branch_b->h_re, branch_b->h, branch_b->mask);
      tl.reg_b = g.latent_reg(branch_b->z_s, branch_b->z_p, branch_b->mask, hp.alpha,
                              kZpFloor);
      tl.re_b = g.weighted_sum({tl.mse_b, tl.reg_b}, {1.0, hp.beta});
    }
    tl.sc = g.symmetric_kl(branch_a.probs, branch_b->probs, kProbFloor);
  }
  return tl;
}

namespace {

// Batch mean of one optional component across texts; invalid when absent.
Var mean_component(Graph& g, const std::vector<TextLossVars>& texts,
                   Var TextLossVars::*member) {
  std::vector<Var> vs;
  for (const TextLossVars& t : texts) {
    if ((t.*member).valid()) vs.push_back(t.*member);
  }
  if (vs.empty()) return Var{};
  return g.weighted_sum(vs, std::vector<double>(vs.size(), 1.0 / vs.size()));
}

double value_or_zero(Var v) { return v.valid() ? v.scalar() : 0.0; }

}  // namespace

Var combine_losses(Graph& g, const std::vector<TextLossVars>& texts,
                   const LossHyperParams& hp, TrainingObjective objective,
                   LossBreakdown* out) {
  if (texts.empty()) throw InputError("combine_losses: empty batch");
  hp.validate();
  if (objective == TrainingObjective::flooding && !hp.flood_level) {
    throw ConfigError("flooding objective requires loss.flood_level");
  }
  if (objective == TrainingObjective::rdrop && !hp.rdrop_weight) {
    throw ConfigError("rdrop objective requires loss.rdrop_weight");
  }

  Var cls_a = mean_component(g, texts, &TextLossVars::cls_a);
  Var cls_b = mean_component(g, texts, &TextLossVars::cls_b);
  Var re_a = mean_component(g, texts, &TextLossVars::re_a);
  Var re_b = mean_component(g, texts, &TextLossVars::re_b);
  Var sc = mean_component(g, texts, &TextLossVars::sc);

  std::vector<Var> terms;
  std::vector<double> weights;
  auto push = [&](Var v, double w) {
    if (v.valid() && w != 0.0) {
      terms.push_back(v);
      weights.push_back(w);
    }
  };

  Var total;
  switch (objective) {
    case TrainingObjective::siamese:
      push(cls_a, hp.lambda1);
      push(cls_b, hp.lambda1);
      push(re_a, hp.lambda2);
      push(re_b, hp.lambda2);
      push(sc, hp.lambda3);
      break;
    case TrainingObjective::single_branch:
    case TrainingObjective::flooding:
      push(cls_a, hp.lambda1);
      push(re_a, hp.lambda2);
      break;
    case TrainingObjective::rdrop:
      push(cls_a, hp.lambda1);
      push(cls_b, hp.lambda1);
      push(sc, *hp.rdrop_weight);
      break;
  }
  if (terms.empty()) {
    // All weights zero: the optimized loss is the constant 0.
    total = g.constant(Mat::scalar(0.0));
  } else {
    total = g.weighted_sum(terms, weights);
  }
  if (objective == TrainingObjective::flooding) total = g.flood(total, *hp.flood_level);

  if (out != nullptr) {
    LossBreakdown b;
    b.l_cls = value_or_zero(cls_a);
    b.l_cls_prime = value_or_zero(cls_b);
    b.l_mse = value_or_zero(mean_component(g, texts, &TextLossVars::mse_a));
    b.l_mse_prime = value_or_zero(mean_component(g, texts, &TextLossVars::mse_b));
    b.l_reg = value_or_zero(mean_component(g, texts, &TextLossVars::reg_a));
    b.l_reg_prime = value_or_zero(mean_component(g, texts, &TextLossVars::reg_b));
    b.l_re = value_or_zero(re_a);
    b.l_re_prime = value_or_zero(re_b);
    b.l_sc = value_or_zero(sc);
    b.l_all = total.scalar();
    *out = b;
  }
  return total;
}

LossBreakdown total_loss(const BranchOutput& branch_a, const BranchOutput& branch_b,
                         Label label, const Mat& originals,
                         const std::vector<uint8_t>& mask, const LossHyperParams& hp,
                         TrainingObjective objective) {
  Graph g(false);
  auto to_vars = [&](const BranchOutput& b) {
    SCRNModel::BranchVars bv;
    bv.mask = mask;
    bv.h = g.constant(originals);
    bv.probs = g.constant(Mat::row({b.class_distribution[0], b.class_distribution[1]}));
    if (!b.latent.z_s.empty()) {
      bv.z = g.constant(b.latent.z);
      bv.z_s = g.constant(b.latent.z_s);
      bv.z_p = g.constant(b.latent.z_p);
    }
    if (!b.reconstructed.empty()) bv.h_re = g.constant(b.reconstructed);
    return bv;
  };
  SCRNModel::BranchVars va = to_vars(branch_a);
  SCRNModel::BranchVars vb = to_vars(branch_b);
  const bool two_branch = objective == TrainingObjective::siamese ||
                          objective == TrainingObjective::rdrop;
  std::vector<TextLossVars> tls{
      text_losses(g, va, two_branch ? &vb : nullptr, label, hp, objective)};
  LossBreakdown out;
  combine_losses(g, tls, hp, objective, &out);
  return out;
}

double gradient_check(const std::function<Var(Graph&)>& loss_fn,
                      const std::vector<Param*>& params, size_t n_coords,
                      double step, uint64_t seed) {
  if (params.empty()) throw InputError("gradient_check: no parameters");
  for (Param* p : params) p->zero_grad();

  std::vector<Mat> analytic;
  {
    Graph g(true);
    Var loss = loss_fn(g);
    g.backward(loss);
  }
  size_t total = 0;
  for (Param* p : params) {
    for (double gv : p->grad.a) {
      if (!std::isfinite(gv)) {
        throw NumericError("gradient_check: non-finite gradient in parameter '" +
                           p->name + "'");
      }
    }
    analytic.push_back(p->grad);
    total += p->size();
  }
  if (total == 0) throw InputError("gradient_check: empty parameters");

  auto eval_loss = [&]() {
    Graph g(false);
    return loss_fn(g).scalar();
  };

  Rng rng(seed);
  double max_rel = 0.0;
  for (size_t k = 0; k < n_coords; ++k) {
    size_t flat = rng.uniform_index(total);
    size_t pi = 0;
    while (flat >= params[pi]->size()) {
      flat -= params[pi]->size();
      ++pi;
    }
    double& coord = params[pi]->value.a[flat];
    const double saved = coord;
    coord = saved + step;
    const double up = eval_loss();
    coord = saved - step;
    const double dn = eval_loss();
    coord = saved;
    const double numeric = (up - dn) / (2.0 * step);
    const double a = analytic[pi].a[flat];
    const double rel = std::abs(a - numeric) /
                       std::max({std::abs(a), std::abs(numeric), 1.0});
    max_rel = std::max(max_rel, rel);
  }
  for (Param* p : params) p->zero_grad();
  return max_rel;
}

}  // namespace scrn
