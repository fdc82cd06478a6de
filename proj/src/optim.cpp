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

#include "scrn/optim.hpp"

#include <cmath>

namespace scrn {

AdamW::AdamW(std::vector<Param*> params, AdamWConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Param* p : params_) {
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

void AdamW::step(double lr_scale) {
  ++t_;
  const double lr = cfg_.lr * lr_scale;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Param& p = *params_[i];
    Mat& m = m_[i];
    Mat& v = v_[i];
    for (size_t k = 0; k < p.size(); ++k) {
      const double grad = p.grad.a[k];
      if (!std::isfinite(grad)) {
        throw NumericError("AdamW: non-finite gradient in parameter '" + p.name + "'");
      }
      m.a[k] = cfg_.beta1 * m.a[k] + (1.0 - cfg_.beta1) * grad;
      v.a[k] = cfg_.beta2 * v.a[k] + (1.0 - cfg_.beta2) * grad * grad;
      const double mhat = m.a[k] / bc1;
      const double vhat = v.a[k] / bc2;
      p.value.a[k] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) +
                            cfg_.weight_decay * p.value.a[k]);
    }
    p.zero_grad();
  }
}

double linear_decay(size_t step, size_t total_steps) {
  if (total_steps == 0) return 1.0;
  if (step >= total_steps) return 0.0;
  return 1.0 - static_cast<double>(step) / static_cast<double>(total_steps);
}

}  // namespace scrn
