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

#include <vector>

#include "scrn/graph.hpp"

namespace scrn {

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Decoupled weight decay Adam. step() consumes the accumulated gradients
// and clears them.
class AdamW {
 public:
  AdamW(std::vector<Param*> params, AdamWConfig cfg);

  // lr_scale multiplies the base learning rate (for schedules).
  void step(double lr_scale = 1.0);
  size_t steps_taken() const { return t_; }

 private:
  std::vector<Param*> params_;
  AdamWConfig cfg_;
  std::vector<Mat> m_, v_;
  size_t t_ = 0;
};

// Linear decay from 1 at step 0 to 0 at total_steps.
double linear_decay(size_t step, size_t total_steps);

}  // namespace scrn
