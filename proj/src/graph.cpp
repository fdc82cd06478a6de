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

#include "scrn/graph.hpp"

#include <algorithm>
#include <cmath>

namespace scrn {

const Mat& Var::val() const { return g->value(*this); }

double Var::scalar() const {
  const Mat& m = val();
  if (m.size() != 1) throw InputError("Var::scalar on non-scalar value");
  return m.a[0];
}

Var Graph::make(Mat val, bool needs, std::function<void(Graph&, const Mat&)> back) {
  Node n;
  n.val = std::move(val);
  n.needs = track_ && needs;
  if (n.needs) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1), this};
}

Mat& Graph::grad_of(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Mat(n.val.rows, n.val.cols);
  return n.grad;
}

void Graph::check_same_graph(Var a) const {
  if (a.g != this || a.id < 0 || a.id >= static_cast<int>(nodes_.size())) {
    throw InputError("Var does not belong to this graph");
  }
}

Var Graph::constant(Mat v) { return make(std::move(v), false, nullptr); }

Var Graph::leaf(Param& p) {
  Node n;
  n.val = p.value;
  n.needs = track_;
  n.param = track_ ? &p : nullptr;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1), this};
}

Var Graph::add(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  const Mat &A = a.val(), &B = b.val();
  if (!A.same_shape(B)) throw InputError("add: shape mismatch");
  Mat out = A;
  for (size_t i = 0; i < out.size(); ++i) out.a[i] += B.a[i];
  const int ia = a.id, ib = b.id;
  return make(std::move(out), needs(a) || needs(b), [ia, ib](Graph& g, const Mat& go) {
    if (g.nodes_[ia].needs) {
      Mat& ga = g.grad_of(ia);
      for (size_t i = 0; i < go.size(); ++i) ga.a[i] += go.a[i];
    }
    if (g.nodes_[ib].needs) {
      Mat& gb = g.grad_of(ib);
      for (size_t i = 0; i < go.size(); ++i) gb.a[i] += go.a[i];
    }
  });
}

Var Graph::sub(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  const Mat &A = a.val(), &B = b.val();
  if (!A.same_shape(B)) throw InputError("sub: shape mismatch");
  Mat out = A;
  for (size_t i = 0; i < out.size(); ++i) out.a[i] -= B.a[i];
  const int ia = a.id, ib = b.id;
  return make(std::move(out), needs(a) || needs(b), [ia, ib](Graph& g, const Mat& go) {
    if (g.nodes_[ia].needs) {
      Mat& ga = g.grad_of(ia);
      for (size_t i = 0; i < go.size(); ++i) ga.a[i] += go.a[i];
    }
    if (g.nodes_[ib].needs) {
      Mat& gb = g.grad_of(ib);
      for (size_t i = 0; i < go.size(); ++i) gb.a[i] -= go.a[i];
    }
  });
}

Var Graph::mul(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  const Mat &A = a.val(), &B = b.val();
  if (!A.same_shape(B)) throw InputError("mul: shape mismatch");
  Mat out = A;
  for (size_t i = 0; i < out.size(); ++i) out.a[i] *= B.a[i];
  const int ia = a.id, ib = b.id;
  return make(std::move(out), needs(a) || needs(b), [ia, ib](Graph& g, const Mat& go) {
    const Mat &A = g.nodes_[ia].val, &B = g.nodes_[ib].val;
    if (g.nodes_[ia].needs) {
      Mat& ga = g.grad_of(ia);
      for (size_t i = 0; i < go.size(); ++i) ga.a[i] += go.a[i] * B.a[i];
    }
    if (g.nodes_[ib].needs) {
      Mat& gb = g.grad_of(ib);
      for (size_t i = 0; i < go.size(); ++i) gb.a[i] += go.a[i] * A.a[i];
    }
  });
}

Var Graph::add_rowvec(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  const Mat &A = a.val(), &B = b.val();
  if (B.rows != 1 || B.cols != A.cols) throw InputError("add_rowvec: shape mismatch");
  Mat out = A;
  for (size_t r = 0; r < out.rows; ++r) {
    double* row = out.row_ptr(r);
    for (size_t c = 0; c < out.cols; ++c) row[c] += B.a[c];
  }
  const int ia = a.id, ib = b.id;
  return make(std::move(out), needs(a) || needs(b), [ia, ib](Graph& g, const Mat& go) {
    if (g.nodes_[ia].needs) {
      Mat& ga = g.grad_of(ia);
      for (size_t i = 0; i < go.size(); ++i) ga.a[i] += go.a[i];
    }
    if (g.nodes_[ib].needs) {
      Mat& gb = g.grad_of(ib);
      for (size_t r = 0; r < go.rows; ++r) {
        const double* row = go.row_ptr(r);
        for (size_t c = 0; c < go.cols; ++c) gb.a[c] += row[c];
      }
    }
  });
}

Var Graph::scale(Var a, double c) {
  check_same_graph(a);
  Mat out = a.val();
  for (double& v : out.a) v *= c;
  const int ia = a.id;
  return make(std::move(out), needs(a), [ia, c](Graph& g, const Mat& go) {
    Mat& ga = g.grad_of(ia);
    for (size_t i = 0; i < go.size(); ++i) ga.a[i] += c * go.a[i];
  });
}

Var Graph::matmul(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  Mat out = mat_mul(a.val(), b.val());
  const int ia = a.id, ib = b.id;
  return make(std::move(out), needs(a) || needs(b), [ia, ib](Graph& g, const Mat& go) {
    const Mat &A = g.nodes_[ia].val, &B = g.nodes_[ib].val;
    if (g.nodes_[ia].needs) mat_mul_nt_acc(go, B, g.grad_of(ia));
    if (g.nodes_[ib].needs) mat_mul_tn_acc(A, go, g.grad_of(ib));
  });
}

Var Graph::matmul_nt(Var a, Var b) {
  check_same_graph(a);
  check_same_graph(b);
  const Mat &A = a.val(), &B = b.val();
  Mat out(A.rows, B.rows);
  mat_mul_nt_acc(A, B, out);
  const int ia = a.id, ib = b.id;
  return make(std::move(out), needs(a) || needs(b), [ia, ib](Graph& g, const Mat& go) {
    const Mat &A = g.nodes_[ia].val, &B = g.nodes_[ib].val;
    if (g.nodes_[ia].needs) mat_mul_acc(go, B, g.grad_of(ia));
    if (g.nodes_[ib].needs) mat_mul_tn_acc(go, A, g.grad_of(ib));
  });
}

Var Graph::slice_cols(Var a, size_t c0, size_t c1) {
  check_same_graph(a);
  const Mat& A = a.val();
  if (c0 >= c1 || c1 > A.cols) throw InputError("slice_cols: bad range");
  Mat out(A.rows, c1 - c0);
  for (size_t r = 0; r < A.rows; ++r) {
    const double* src = A.row_ptr(r);
    double* dst = out.row_ptr(r);
    for (size_t c = c0; c < c1; ++c) dst[c - c0] = src[c];
  }
  const int ia = a.id;
  return make(std::move(out), needs(a), [ia, c0](Graph& g, const Mat& go) {
    Mat& ga = g.grad_of(ia);
    for (size_t r = 0; r < go.rows; ++r) {
      const double* src = go.row_ptr(r);
      double* dst = ga.row_ptr(r);
      for (size_t c = 0; c < go.cols; ++c) dst[c0 + c] += src[c];
    }
  });
}

Var Graph::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw InputError("concat_cols: empty");
  size_t rows = parts[0].val().rows;
  size_t cols = 0;
  bool any_needs = false;
  for (Var p : parts) {
    check_same_graph(p);
    if (p.val().rows != rows) throw InputError("concat_cols: row mismatch");
    cols += p.val().cols;
    any_needs = any_needs || needs(p);
  }
  Mat out(rows, cols);
  size_t off = 0;
  std::vector<int> ids;
  std::vector<size_t> widths;
  for (Var p : parts) {
    const Mat& P = p.val();
    for (size_t r = 0; r < rows; ++r) {
      const double* src = P.row_ptr(r);
      double* dst = out.row_ptr(r) + off;
      std::copy(src, src + P.cols, dst);
    }
    ids.push_back(p.id);
    widths.push_back(P.cols);
    off += P.cols;
  }
  return make(std::move(out), any_needs, [ids, widths](Graph& g, const Mat& go) {
    size_t off = 0;
    for (size_t k = 0; k < ids.size(); ++k) {
      if (g.nodes_[ids[k]].needs) {
        Mat& gp = g.grad_of(ids[k]);
        for (size_t r = 0; r < go.rows; ++r) {
          const double* src = go.row_ptr(r) + off;
          double* dst = gp.row_ptr(r);
          for (size_t c = 0; c < widths[k]; ++c) dst[c] += src[c];
        }
      }
      off += widths[k];
    }
  });
}

Var Graph::rows_gather(Var src, const std::vector<int>& indices) {
  check_same_graph(src);
  const Mat& S = src.val();
  Mat out(indices.size(), S.cols);
  for (size_t i = 0; i < indices.size(); ++i) {
    const int r = indices[i];
    if (r < 0 || static_cast<size_t>(r) >= S.rows) {
      throw InputError("rows_gather: index " + std::to_string(r) + " out of range");
    }
    std::copy(S.row_ptr(r), S.row_ptr(r) + S.cols, out.row_ptr(i));
  }
  const int is = src.id;
  return make(std::move(out), needs(src), [is, indices](Graph& g, const Mat& go) {
    Mat& gs = g.grad_of(is);
    for (size_t i = 0; i < indices.size(); ++i) {
      const double* srow = go.row_ptr(i);
      double* drow = gs.row_ptr(indices[i]);
      for (size_t c = 0; c < go.cols; ++c) drow[c] += srow[c];
    }
  });
}

Var Graph::relu(Var a) {
  check_same_graph(a);
  Mat out = a.val();
  for (double& v : out.a) v = v > 0.0 ? v : 0.0;
  const int ia = a.id;
  return make(std::move(out), needs(a), [ia](Graph& g, const Mat& go) {
    const Mat& A = g.nodes_[ia].val;
    Mat& ga = g.grad_of(ia);
    for (size_t i = 0; i < go.size(); ++i) {
      if (A.a[i] > 0.0) ga.a[i] += go.a[i];
    }
  });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluK = 0.044715;
}  // namespace

Var Graph::gelu(Var a) {
  check_same_graph(a);
  Mat out = a.val();
  for (double& v : out.a) {
    const double u = kGeluC * (v + kGeluK * v * v * v);
    v = 0.5 * v * (1.0 + std::tanh(u));
  }
  const int ia = a.id;
  return make(std::move(out), needs(a), [ia](Graph& g, const Mat& go) {
    const Mat& A = g.nodes_[ia].val;
    Mat& ga = g.grad_of(ia);
    for (size_t i = 0; i < go.size(); ++i) {
      const double x = A.a[i];
      const double u = kGeluC * (x + kGeluK * x * x * x);
      const double t = std::tanh(u);
      const double du = kGeluC * (1.0 + 3.0 * kGeluK * x * x);
      const double d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
      ga.a[i] += go.a[i] * d;
    }
  });
}

Var Graph::softmax_rows(Var a) {
  check_same_graph(a);
  Mat out = a.val();
  for (size_t r = 0; r < out.rows; ++r) {
    double* row = out.row_ptr(r);
    double mx = row[0];
    for (size_t c = 1; c < out.cols; ++c) mx = std::max(mx, row[c]);
    double sum = 0.0;
    for (size_t c = 0; c < out.cols; ++c) {
      row[c] = std::exp(row[c] - mx);
      sum += row[c];
    }
    for (size_t c = 0; c < out.cols; ++c) row[c] /= sum;
  }
  const int ia = a.id;
  return make(std::move(out), needs(a), [ia, self = static_cast<int>(nodes_.size())](Graph& g, const Mat& go) {
    const Mat& P = g.nodes_[self].val;
    Mat& ga = g.grad_of(ia);
    for (size_t r = 0; r < go.rows; ++r) {
      const double* p = P.row_ptr(r);
      const double* dy = go.row_ptr(r);
      double dot = 0.0;
      for (size_t c = 0; c < go.cols; ++c) dot += dy[c] * p[c];
      double* dx = ga.row_ptr(r);
      for (size_t c = 0; c < go.cols; ++c) dx[c] += p[c] * (dy[c] - dot);
    }
  });
}

Var Graph::layer_norm_rows(Var a, Var gamma, Var beta, double eps) {
  check_same_graph(a);
  check_same_graph(gamma);
  check_same_graph(beta);
  const Mat& A = a.val();
  const Mat& G = gamma.val();
  const Mat& B = beta.val();
  if (G.rows != 1 || G.cols != A.cols || B.rows != 1 || B.cols != A.cols) {
    throw InputError("layer_norm_rows: gamma/beta must be 1 x cols");
  }
  const size_t d = A.cols;
  Mat xhat(A.rows, d);
  Mat inv_std(A.rows, 1);
  Mat out(A.rows, d);
  for (size_t r = 0; r < A.rows; ++r) {
    const double* x = A.row_ptr(r);
    double mean = 0.0;
    for (size_t c = 0; c < d; ++c) mean += x[c];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (size_t c = 0; c < d; ++c) {
      const double dv = x[c] - mean;
      var += dv * dv;
    }
    var /= static_cast<double>(d);
    const double istd = 1.0 / std::sqrt(var + eps);
    inv_std.a[r] = istd;
    double* xh = xhat.row_ptr(r);
    double* o = out.row_ptr(r);
    for (size_t c = 0; c < d; ++c) {
      xh[c] = (x[c] - mean) * istd;
      o[c] = G.a[c] * xh[c] + B.a[c];
    }
  }
  const int ia = a.id, ig = gamma.id, ib = beta.id;
  const bool need = needs(a) || needs(gamma) || needs(beta);
  return make(std::move(out), need,
              [ia, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& g, const Mat& go) {
    const Mat& G = g.nodes_[ig].val;
    const size_t d = go.cols;
    if (g.nodes_[ib].needs) {
      Mat& gb = g.grad_of(ib);
      for (size_t r = 0; r < go.rows; ++r) {
        const double* dy = go.row_ptr(r);
        for (size_t c = 0; c < d; ++c) gb.a[c] += dy[c];
      }
    }
    if (g.nodes_[ig].needs) {
      Mat& gg = g.grad_of(ig);
      for (size_t r = 0; r < go.rows; ++r) {
        const double* dy = go.row_ptr(r);
        const double* xh = xhat.row_ptr(r);
        for (size_t c = 0; c < d; ++c) gg.a[c] += dy[c] * xh[c];
      }
    }
    if (g.nodes_[ia].needs) {
      Mat& ga = g.grad_of(ia);
      for (size_t r = 0; r < go.rows; ++r) {
        const double* dy = go.row_ptr(r);
        const double* xh = xhat.row_ptr(r);
        double m1 = 0.0, m2 = 0.0;  // mean(dxh), mean(dxh * xhat)
        for (size_t c = 0; c < d; ++c) {
          const double dxh = dy[c] * G.a[c];
          m1 += dxh;
          m2 += dxh * xh[c];
        }
        m1 /= static_cast<double>(d);
        m2 /= static_cast<double>(d);
        double* dx = ga.row_ptr(r);
        const double istd = inv_std.a[r];
        for (size_t c = 0; c < d; ++c) {
          const double dxh = dy[c] * G.a[c];
          dx[c] += istd * (dxh - m1 - xh[c] * m2);
        }
      }
    }
  });
}

Var Graph::dropout(Var a, double rate, Rng& rng) {
  check_same_graph(a);
  if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
  const Mat& A = a.val();
  Mat mask(A.rows, A.cols);
  const double keep = 1.0 - rate;
  for (double& m : mask.a) m = rng.uniform() >= rate ? 1.0 / keep : 0.0;
  Mat out = A;
  for (size_t i = 0; i < out.size(); ++i) out.a[i] *= mask.a[i];
  const int ia = a.id;
  return make(std::move(out), needs(a), [ia, mask = std::move(mask)](Graph& g, const Mat& go) {
    Mat& ga = g.grad_of(ia);
    for (size_t i = 0; i < go.size(); ++i) ga.a[i] += go.a[i] * mask.a[i];
  });
}

Var Graph::maxpool_rows(Var a, const std::vector<uint8_t>& mask) {
  check_same_graph(a);
  const Mat& A = a.val();
  if (mask.size() != A.rows) throw InputError("maxpool_rows: mask length mismatch");
  Mat out(1, A.cols);
  std::vector<int> argmax(A.cols, -1);
  bool any = false;
  for (size_t r = 0; r < A.rows; ++r) {
    if (!mask[r]) continue;
    const double* row = A.row_ptr(r);
    for (size_t c = 0; c < A.cols; ++c) {
      if (argmax[c] < 0 || row[c] > out.a[c]) {
        out.a[c] = row[c];
        argmax[c] = static_cast<int>(r);
      }
    }
    any = true;
  }
  if (!any) throw InputError("maxpool_rows: all positions masked");
  const int ia = a.id;
  return make(std::move(out), needs(a), [ia, argmax = std::move(argmax)](Graph& g, const Mat& go) {
    Mat& ga = g.grad_of(ia);
    for (size_t c = 0; c < go.cols; ++c) ga.at(argmax[c], c) += go.a[c];
  });
}

Var Graph::masked_mse(Var a, Var b, const std::vector<uint8_t>& mask) {
  check_same_graph(a);
  check_same_graph(b);
  const Mat &A = a.val(), &B = b.val();
  if (!A.same_shape(B)) throw InputError("masked_mse: shape mismatch");
  if (mask.size() != A.rows) throw InputError("masked_mse: mask length mismatch");
  size_t n_u = 0;
  double total = 0.0;
  for (size_t r = 0; r < A.rows; ++r) {
    if (!mask[r]) continue;
    ++n_u;
    const double *ra = A.row_ptr(r), *rb = B.row_ptr(r);
    for (size_t c = 0; c < A.cols; ++c) {
      const double dv = ra[c] - rb[c];
      total += dv * dv;
    }
  }
  if (n_u == 0) throw InputError("masked_mse: all positions masked");
  Mat out = Mat::scalar(total / static_cast<double>(n_u));
  const int ia = a.id, ib = b.id;
  return make(std::move(out), needs(a) || needs(b), [ia, ib, mask, n_u](Graph& g, const Mat& go) {
    const Mat &A = g.nodes_[ia].val, &B = g.nodes_[ib].val;
    const double s = 2.0 * go.a[0] / static_cast<double>(n_u);
    for (size_t r = 0; r < A.rows; ++r) {
      if (!mask[r]) continue;
      const double *ra = A.row_ptr(r), *rb = B.row_ptr(r);
      if (g.nodes_[ia].needs) {
        double* gr = g.grad_of(ia).row_ptr(r);
        for (size_t c = 0; c < A.cols; ++c) gr[c] += s * (ra[c] - rb[c]);
      }
      if (g.nodes_[ib].needs) {
        double* gr = g.grad_of(ib).row_ptr(r);
        for (size_t c = 0; c < A.cols; ++c) gr[c] -= s * (ra[c] - rb[c]);
      }
    }
  });
}

Var Graph::latent_reg(Var z_s, Var z_p, const std::vector<uint8_t>& mask,
                      double alpha, double abs_floor) {
  check_same_graph(z_s);
  check_same_graph(z_p);
  const Mat &S = z_s.val(), &P = z_p.val();
  if (P.cols != 1 || P.rows != S.rows) throw InputError("latent_reg: z_p must be n x 1");
  if (mask.size() != S.rows) throw InputError("latent_reg: mask length mismatch");
  size_t n_u = 0;
  double total = 0.0;
  for (size_t r = 0; r < S.rows; ++r) {
    if (!mask[r]) continue;
    ++n_u;
    const double* srow = S.row_ptr(r);
    double sq = 0.0;
    for (size_t c = 0; c < S.cols; ++c) sq += srow[c] * srow[c];
    const double zp = P.a[r];
    total += sq + zp * zp - alpha * std::log(std::max(std::abs(zp), abs_floor));
  }
  if (n_u == 0) throw InputError("latent_reg: all positions masked");
  Mat out = Mat::scalar(total / static_cast<double>(n_u));
  const int is = z_s.id, ip = z_p.id;
  return make(std::move(out), needs(z_s) || needs(z_p),
              [is, ip, mask, n_u, alpha, abs_floor](Graph& g, const Mat& go) {
    const Mat &S = g.nodes_[is].val, &P = g.nodes_[ip].val;
    const double s = go.a[0] / static_cast<double>(n_u);
    for (size_t r = 0; r < S.rows; ++r) {
      if (!mask[r]) continue;
      if (g.nodes_[is].needs) {
        const double* srow = S.row_ptr(r);
        double* grow = g.grad_of(is).row_ptr(r);
        for (size_t c = 0; c < S.cols; ++c) grow[c] += s * 2.0 * srow[c];
      }
      if (g.nodes_[ip].needs) {
        const double zp = P.a[r];
        double d = 2.0 * zp;
        if (std::abs(zp) >= abs_floor) d -= alpha / zp;
        g.grad_of(ip).a[r] += s * d;
      }
    }
  });
}

Var Graph::inject_noise(Var z_s, Var z_p, const Mat& eps) {
  check_same_graph(z_s);
  check_same_graph(z_p);
  const Mat &S = z_s.val(), &P = z_p.val();
  if (P.cols != 1 || P.rows != S.rows) throw InputError("inject_noise: z_p must be n x 1");
  if (eps.cols != 1 || eps.rows != S.rows) {
    throw InputError("inject_noise: noise must have one value per token");
  }
  Mat out = S;
  for (size_t r = 0; r < out.rows; ++r) {
    const double e = eps.a[r] * P.a[r];
    double* row = out.row_ptr(r);
    for (size_t c = 0; c < out.cols; ++c) row[c] += e;
  }
  const int is = z_s.id, ip = z_p.id;
  return make(std::move(out), needs(z_s) || needs(z_p), [is, ip, eps](Graph& g, const Mat& go) {
    if (g.nodes_[is].needs) {
      Mat& gs = g.grad_of(is);
      for (size_t i = 0; i < go.size(); ++i) gs.a[i] += go.a[i];
    }
    if (g.nodes_[ip].needs) {
      Mat& gp = g.grad_of(ip);
      for (size_t r = 0; r < go.rows; ++r) {
        const double* row = go.row_ptr(r);
        double sum = 0.0;
        for (size_t c = 0; c < go.cols; ++c) sum += row[c];
        gp.a[r] += eps.a[r] * sum;
      }
    }
  });
}

Var Graph::cross_entropy(Var probs, int label_idx, double floor) {
  check_same_graph(probs);
  const Mat& P = probs.val();
  if (P.rows != 1) throw InputError("cross_entropy: expected a 1 x C probability row");
  if (label_idx < 0 || static_cast<size_t>(label_idx) >= P.cols) {
    throw InputError("cross_entropy: label index out of range");
  }
  for (double v : P.a) {
    if (!std::isfinite(v)) {
      throw NumericError("cross_entropy: non-finite probability");
    }
    if (!(v >= -1e-9) || !(v <= 1.0 + 1e-9)) {
      throw InputError("cross_entropy: invalid probability distribution");
    }
  }
  const double p = std::max(P.a[label_idx], floor);
  Mat out = Mat::scalar(-std::log(p));
  const int ip = probs.id;
  return make(std::move(out), needs(probs), [ip, label_idx, floor](Graph& g, const Mat& go) {
    const double p = g.nodes_[ip].val.a[label_idx];
    if (p >= floor) g.grad_of(ip).a[label_idx] += go.a[0] * (-1.0 / p);
  });
}

Var Graph::symmetric_kl(Var p, Var q, double floor) {
  check_same_graph(p);
  check_same_graph(q);
  const Mat &P = p.val(), &Q = q.val();
  if (!P.same_shape(Q) || P.rows != 1) throw InputError("symmetric_kl: expected matching 1 x C rows");
  double total = 0.0;
  for (size_t c = 0; c < P.cols; ++c) {
    const double pc = std::max(P.a[c], floor);
    const double qc = std::max(Q.a[c], floor);
    total += 0.5 * (pc * (std::log(pc) - std::log(qc)) + qc * (std::log(qc) - std::log(pc)));
  }
  Mat out = Mat::scalar(total);
  const int ip = p.id, iq = q.id;
  return make(std::move(out), needs(p) || needs(q), [ip, iq, floor](Graph& g, const Mat& go) {
    const Mat &P = g.nodes_[ip].val, &Q = g.nodes_[iq].val;
    for (size_t c = 0; c < P.cols; ++c) {
      const double pc = std::max(P.a[c], floor);
      const double qc = std::max(Q.a[c], floor);
      const double lr = std::log(pc) - std::log(qc);
      if (g.nodes_[ip].needs && P.a[c] >= floor) {
        g.grad_of(ip).a[c] += go.a[0] * 0.5 * (lr + 1.0 - qc / pc);
      }
      if (g.nodes_[iq].needs && Q.a[c] >= floor) {
        g.grad_of(iq).a[c] += go.a[0] * 0.5 * (-lr + 1.0 - pc / qc);
      }
    }
  });
}

Var Graph::weighted_sum(const std::vector<Var>& vs, const std::vector<double>& ws) {
  if (vs.size() != ws.size() || vs.empty()) throw InputError("weighted_sum: size mismatch");
  double total = 0.0;
  bool any_needs = false;
  std::vector<int> ids;
  for (size_t i = 0; i < vs.size(); ++i) {
    check_same_graph(vs[i]);
    if (vs[i].val().size() != 1) throw InputError("weighted_sum: non-scalar term");
    total += ws[i] * vs[i].val().a[0];
    any_needs = any_needs || needs(vs[i]);
    ids.push_back(vs[i].id);
  }
  return make(Mat::scalar(total), any_needs, [ids, ws](Graph& g, const Mat& go) {
    for (size_t i = 0; i < ids.size(); ++i) {
      if (g.nodes_[ids[i]].needs) g.grad_of(ids[i]).a[0] += go.a[0] * ws[i];
    }
  });
}

Var Graph::flood(Var a, double level) {
  check_same_graph(a);
  if (a.val().size() != 1) throw InputError("flood: expects a scalar loss");
  const double x = a.val().a[0];
  Mat out = Mat::scalar(std::abs(x - level) + level);
  const int ia = a.id;
  return make(std::move(out), needs(a), [ia, level](Graph& g, const Mat& go) {
    const double x = g.nodes_[ia].val.a[0];
    // Subgradient +1 at exactly the flood level.
    g.grad_of(ia).a[0] += go.a[0] * (x >= level ? 1.0 : -1.0);
  });
}

void Graph::backward(Var loss) {
  check_same_graph(loss);
  if (!track_) throw InputError("backward on a non-tracking graph");
  Node& top = nodes_[loss.id];
  if (top.val.size() != 1) throw InputError("backward: loss must be scalar");
  if (!top.needs) return;  // loss does not depend on any parameter
  grad_of(loss.id).a[0] = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs || n.grad.empty()) continue;
    if (n.param != nullptr) {
      Mat& pg = n.param->grad;
      for (size_t i = 0; i < pg.size(); ++i) pg.a[i] += n.grad.a[i];
    } else if (n.back) {
      n.back(*this, n.grad);
    }
  }
}

}  // namespace scrn
