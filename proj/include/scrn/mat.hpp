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

#include <cstddef>
#include <vector>

#include "scrn/common.hpp"

namespace scrn {

// Dense row-major matrix of doubles. Row vectors are 1 x m, scalars 1 x 1.
// Double precision throughout: gradient checks against central finite
// differences need it, and desk-scale models are small enough not to care.
struct Mat {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  static Mat row(std::vector<double> values) {
    Mat m;
    m.rows = 1;
    m.cols = values.size();
    m.a = std::move(values);
    return m;
  }
  static Mat scalar(double v) { return Mat::row({v}); }

  double& at(size_t r, size_t c) { return a[r * cols + c]; }
  double at(size_t r, size_t c) const { return a[r * cols + c]; }
  double* row_ptr(size_t r) { return a.data() + r * cols; }
  const double* row_ptr(size_t r) const { return a.data() + r * cols; }
  size_t size() const { return a.size(); }
  bool empty() const { return a.empty(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  void fill(double v) { std::fill(a.begin(), a.end(), v); }
  bool all_finite() const;
};

// C += A * B
void mat_mul_acc(const Mat& A, const Mat& B, Mat& C);
// C += A * B^T
void mat_mul_nt_acc(const Mat& A, const Mat& B, Mat& C);
// C += A^T * B
void mat_mul_tn_acc(const Mat& A, const Mat& B, Mat& C);

Mat mat_mul(const Mat& A, const Mat& B);

}  // namespace scrn
