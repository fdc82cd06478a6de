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

#include "scrn/mat.hpp"

#include <cmath>

namespace scrn {

bool Mat::all_finite() const {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void mat_mul_acc(const Mat& A, const Mat& B, Mat& C) {
  if (A.cols != B.rows || C.rows != A.rows || C.cols != B.cols) {
    throw InputError("mat_mul_acc: shape mismatch");
  }
  const size_t n = A.rows, k = A.cols, m = B.cols;
  for (size_t i = 0; i < n; ++i) {
    const double* arow = A.row_ptr(i);
    double* crow = C.row_ptr(i);
    for (size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = B.row_ptr(p);
      for (size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

void mat_mul_nt_acc(const Mat& A, const Mat& B, Mat& C) {
  if (A.cols != B.cols || C.rows != A.rows || C.cols != B.rows) {
    throw InputError("mat_mul_nt_acc: shape mismatch");
  }
  const size_t n = A.rows, k = A.cols, m = B.rows;
  for (size_t i = 0; i < n; ++i) {
    const double* arow = A.row_ptr(i);
    double* crow = C.row_ptr(i);
    for (size_t j = 0; j < m; ++j) {
      const double* brow = B.row_ptr(j);
      double s = 0.0;
      for (size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      crow[j] += s;
    }
  }
}

void mat_mul_tn_acc(const Mat& A, const Mat& B, Mat& C) {
  if (A.rows != B.rows || C.rows != A.cols || C.cols != B.cols) {
    throw InputError("mat_mul_tn_acc: shape mismatch");
  }
  const size_t n = A.cols, k = A.rows, m = B.cols;
  for (size_t p = 0; p < k; ++p) {
    const double* arow = A.row_ptr(p);
    const double* brow = B.row_ptr(p);
    for (size_t i = 0; i < n; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = C.row_ptr(i);
      for (size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

Mat mat_mul(const Mat& A, const Mat& B) {
  Mat C(A.rows, B.cols);
  mat_mul_acc(A, B, C);
  return C;
}

}  // namespace scrn
