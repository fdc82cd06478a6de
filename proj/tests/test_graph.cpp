#include "scrn/graph.hpp"

#include <cmath>

#include "doctest.h"
#include "test_support.hpp"

using namespace scrn;
using scrn::test::central_diff;
using scrn::test::random_mat;

namespace {

// Finite-difference check of d(loss)/d(param) over every coordinate of `p`.
// The numeric side re-runs the full forward on a non-tracking graph, so it
// is independent of the backward closures it validates.
void check_param_grads(const std::function<Var(Graph&)>& build, Param& p,
                       double tol = 1e-6) {
  p.zero_grad();
  {
    Graph g(true);
    g.backward(build(g));
  }
  for (size_t k = 0; k < p.size(); ++k) {
    const double numeric = central_diff(
        [&]() {
          Graph g(false);
          return build(g).scalar();
        },
        p.value.a[k]);
    const double analytic = p.grad.a[k];
    CHECK(std::abs(analytic - numeric) <=
          tol * std::max({std::abs(analytic), std::abs(numeric), 1.0}));
  }
  p.zero_grad();
}

// Reduce an arbitrary output to a scalar through a fixed weighting so every
// output coordinate influences the loss.
Var weigh(Graph& g, Var out) {
  const Mat& v = out.val();
  Mat w(v.rows, v.cols);
  for (size_t i = 0; i < w.size(); ++i) w.a[i] = 0.1 * static_cast<double>(i % 7) + 0.3;
  Var prod = g.mul(out, g.constant(std::move(w)));
  // sum via masked_mse against zero is overkill; use weighted_sum over a
  // single matmul with a ones column instead.
  Mat ones_col(v.cols, 1, 1.0);
  Var col = g.matmul(prod, g.constant(std::move(ones_col)));  // rows x 1
  Mat ones_row(1, v.rows, 1.0);
  return g.matmul(g.constant(std::move(ones_row)), col);  // 1 x 1
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("matmul forward matches hand arithmetic") {
  Graph g(false);
  Mat A(2, 3);
  A.a = {1, 2, 3, 4, 5, 6};
  Mat B(3, 2);
  B.a = {7, 8, 9, 10, 11, 12};
  const Mat& C = g.matmul(g.constant(A), g.constant(B)).val();
  CHECK(C.rows == 2);
  CHECK(C.cols == 2);
  CHECK(C.at(0, 0) == doctest::Approx(58));
  CHECK(C.at(0, 1) == doctest::Approx(64));
  CHECK(C.at(1, 0) == doctest::Approx(139));
  CHECK(C.at(1, 1) == doctest::Approx(154));
}

TEST_CASE("matmul_nt equals matmul with explicit transpose") {
  Rng rng(11);
  Mat A = random_mat(3, 4, rng), B = random_mat(5, 4, rng);
  Mat Bt(4, 5);
  for (size_t r = 0; r < 5; ++r)
    for (size_t c = 0; c < 4; ++c) Bt.at(c, r) = B.at(r, c);
  Graph g(false);
  const Mat& out = g.matmul_nt(g.constant(A), g.constant(B)).val();
  const Mat ref = mat_mul(A, Bt);
  REQUIRE(out.size() == ref.size());
  for (size_t i = 0; i < out.size(); ++i) CHECK(out.a[i] == doctest::Approx(ref.a[i]));
}

TEST_CASE("elementwise and broadcast op gradients match finite differences") {
  Rng rng(42);
  Param p("p", random_mat(3, 4, rng));
  Param q("q", random_mat(3, 4, rng));
  Param b("b", random_mat(1, 4, rng));

  check_param_grads([&](Graph& g) { return weigh(g, g.add(g.leaf(p), g.leaf(q))); }, p);
  check_param_grads([&](Graph& g) { return weigh(g, g.sub(g.leaf(p), g.leaf(q))); }, q);
  check_param_grads([&](Graph& g) { return weigh(g, g.mul(g.leaf(p), g.leaf(q))); }, p);
  check_param_grads([&](Graph& g) { return weigh(g, g.add_rowvec(g.leaf(p), g.leaf(b))); }, b);
  check_param_grads([&](Graph& g) { return weigh(g, g.scale(g.leaf(p), -2.5)); }, p);
}

TEST_CASE("matmul family gradients match finite differences") {
  Rng rng(7);
  Param A("A", random_mat(2, 3, rng));
  Param B("B", random_mat(3, 4, rng));
  Param C("C", random_mat(5, 3, rng));

  check_param_grads([&](Graph& g) { return weigh(g, g.matmul(g.leaf(A), g.leaf(B))); }, A);
  check_param_grads([&](Graph& g) { return weigh(g, g.matmul(g.leaf(A), g.leaf(B))); }, B);
  check_param_grads([&](Graph& g) { return weigh(g, g.matmul_nt(g.leaf(A), g.leaf(C))); }, A);
  check_param_grads([&](Graph& g) { return weigh(g, g.matmul_nt(g.leaf(A), g.leaf(C))); }, C);
}

TEST_CASE("nonlinearity gradients match finite differences") {
  Rng rng(13);
  Param p("p", random_mat(3, 5, rng));
  // Keep values away from the relu kink.
  for (double& v : p.value.a) {
    if (std::abs(v) < 0.05) v = 0.2;
  }
  check_param_grads([&](Graph& g) { return weigh(g, g.relu(g.leaf(p))); }, p);
  check_param_grads([&](Graph& g) { return weigh(g, g.gelu(g.leaf(p))); }, p);
  check_param_grads([&](Graph& g) { return weigh(g, g.softmax_rows(g.leaf(p))); }, p);
}

TEST_CASE("softmax rows sum to one and match exp normalization") {
  Rng rng(5);
  Mat x = random_mat(4, 6, rng, 2.0);
  Graph g(false);
  const Mat& P = g.softmax_rows(g.constant(x)).val();
  for (size_t r = 0; r < 4; ++r) {
    double sum = 0.0, ref_sum = 0.0;
    for (size_t c = 0; c < 6; ++c) ref_sum += std::exp(x.at(r, c));
    for (size_t c = 0; c < 6; ++c) {
      sum += P.at(r, c);
      CHECK(P.at(r, c) == doctest::Approx(std::exp(x.at(r, c)) / ref_sum));
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("layer norm gradients match finite differences") {
  Rng rng(3);
  Param x("x", random_mat(3, 6, rng));
  Param gamma("gamma", random_mat(1, 6, rng, 0.5));
  Param beta("beta", random_mat(1, 6, rng, 0.5));
  auto build = [&](Graph& g) {
    return weigh(g, g.layer_norm_rows(g.leaf(x), g.leaf(gamma), g.leaf(beta)));
  };
  check_param_grads(build, x);
  check_param_grads(build, gamma);
  check_param_grads(build, beta);
}

TEST_CASE("rows_gather, slice and concat gradients match finite differences") {
  Rng rng(21);
  Param emb("emb", random_mat(7, 4, rng));
  std::vector<int> ids{1, 3, 3, 0, 6};
  check_param_grads([&](Graph& g) { return weigh(g, g.rows_gather(g.leaf(emb), ids)); },
                    emb);
  Param x("x", random_mat(3, 6, rng));
  check_param_grads(
      [&](Graph& g) {
        Var a = g.slice_cols(g.leaf(x), 0, 2);
        Var b = g.slice_cols(g.leaf(x), 2, 6);
        return weigh(g, g.concat_cols({b, a}));
      },
      x);
}

TEST_CASE("maxpool selects per-column max over unmasked rows") {
  Mat x(3, 2);
  x.a = {1, 5, 3, 2, 9, 9};
  std::vector<uint8_t> mask{1, 1, 0};
  Graph g(false);
  const Mat& out = g.maxpool_rows(g.constant(x), mask).val();
  CHECK(out.a[0] == doctest::Approx(3));
  CHECK(out.a[1] == doctest::Approx(5));
  CHECK_THROWS_AS(
      (void)g.maxpool_rows(g.constant(x), std::vector<uint8_t>{0, 0, 0}), InputError);
}

TEST_CASE("maxpool gradient matches finite differences") {
  Rng rng(31);
  Param x("x", random_mat(4, 3, rng));
  std::vector<uint8_t> mask{1, 0, 1, 1};
  check_param_grads([&](Graph& g) { return weigh(g, g.maxpool_rows(g.leaf(x), mask)); },
                    x);
}

TEST_CASE("masked_mse value and gradients") {
  Mat a(2, 2), b(2, 2);
  a.a = {1, 2, 3, 4};
  b.a = {0, 0, 3, 4};
  Graph g(false);
  // Row 0 differs by (1,2): squared norm 5; row 1 identical. Mean over 2 rows.
  CHECK(g.masked_mse(g.constant(a), g.constant(b), {1, 1}).scalar() ==
        doctest::Approx(2.5));
  CHECK(g.masked_mse(g.constant(a), g.constant(b), {0, 1}).scalar() ==
        doctest::Approx(0.0));

  Rng rng(17);
  Param pa("pa", random_mat(3, 4, rng));
  Param pb("pb", random_mat(3, 4, rng));
  std::vector<uint8_t> mask{1, 0, 1};
  check_param_grads(
      [&](Graph& g2) { return g2.masked_mse(g2.leaf(pa), g2.leaf(pb), mask); }, pa);
  check_param_grads(
      [&](Graph& g2) { return g2.masked_mse(g2.leaf(pa), g2.leaf(pb), mask); }, pb);
}

TEST_CASE("latent_reg value and gradients") {
  // z_s = 0, |z_p| = 1, alpha = 2 -> 0 + 1 - 2*ln(1) = 1.
  Graph g(false);
  Mat zs(1, 3), zp(1, 1);
  zp.a = {1.0};
  CHECK(g.latent_reg(g.constant(zs), g.constant(zp), {1}, 2.0, 1e-8).scalar() ==
        doctest::Approx(1.0));

  Rng rng(19);
  Param ps("ps", random_mat(3, 4, rng));
  Param pp("pp", random_mat(3, 1, rng));
  // Keep |z_p| away from 0 so the finite difference is smooth.
  for (double& v : pp.value.a) v = v >= 0 ? v + 0.5 : v - 0.5;
  std::vector<uint8_t> mask{1, 1, 0};
  check_param_grads(
      [&](Graph& g2) {
        return g2.latent_reg(g2.leaf(ps), g2.leaf(pp), mask, 2.0, 1e-8);
      },
      ps);
  check_param_grads(
      [&](Graph& g2) {
        return g2.latent_reg(g2.leaf(ps), g2.leaf(pp), mask, 2.0, 1e-8);
      },
      pp);
}

TEST_CASE("inject_noise value and gradients") {
  Graph g(false);
  Mat zs(2, 3), zp(2, 1), eps(2, 1);
  zs.a = {1, 1, 1, 0, 0, 0};
  zp.a = {2, 3};
  eps.a = {0.5, -1};
  const Mat& out = g.inject_noise(g.constant(zs), g.constant(zp), eps).val();
  CHECK(out.at(0, 0) == doctest::Approx(2.0));
  CHECK(out.at(1, 2) == doctest::Approx(-3.0));

  Rng rng(23);
  Param ps("ps", random_mat(3, 4, rng));
  Param pp("pp", random_mat(3, 1, rng));
  Mat noise = random_mat(3, 1, rng);
  check_param_grads(
      [&](Graph& g2) {
        return weigh(g2, g2.inject_noise(g2.leaf(ps), g2.leaf(pp), noise));
      },
      ps);
  check_param_grads(
      [&](Graph& g2) {
        return weigh(g2, g2.inject_noise(g2.leaf(ps), g2.leaf(pp), noise));
      },
      pp);
}

TEST_CASE("cross_entropy and symmetric_kl gradients match finite differences") {
  Param logits("logits", Mat::row({0.4, -0.3}));
  Param logits2("logits2", Mat::row({-0.2, 0.7}));
  auto build_ce = [&](Graph& g) {
    return g.cross_entropy(g.softmax_rows(g.leaf(logits)), 1);
  };
  check_param_grads(build_ce, logits);

  auto build_kl = [&](Graph& g) {
    return g.symmetric_kl(g.softmax_rows(g.leaf(logits)),
                          g.softmax_rows(g.leaf(logits2)));
  };
  check_param_grads(build_kl, logits);
  check_param_grads(build_kl, logits2);
}

TEST_CASE("weighted_sum and flood") {
  Param a("a", Mat::scalar(2.0));
  Param b("b", Mat::scalar(3.0));
  {
    Graph g(false);
    CHECK(g.weighted_sum({g.leaf(a), g.leaf(b)}, {0.5, 2.0}).scalar() ==
          doctest::Approx(7.0));
    CHECK(g.flood(g.leaf(a), 5.0).scalar() == doctest::Approx(8.0));   // |2-5|+5
    CHECK(g.flood(g.leaf(b), 1.0).scalar() == doctest::Approx(3.0));   // |3-1|+1
  }
  check_param_grads(
      [&](Graph& g) { return g.weighted_sum({g.leaf(a), g.leaf(b)}, {0.5, 2.0}); }, a);
  // Below the flood level the gradient must point away from the minimum.
  check_param_grads([&](Graph& g) { return g.flood(g.leaf(a), 5.0); }, a);
  a.zero_grad();
  {
    Graph g(true);
    g.backward(g.flood(g.leaf(a), 5.0));
  }
  CHECK(a.grad.a[0] == doctest::Approx(-1.0));  // descent increases a toward 5
  a.zero_grad();
}

TEST_CASE("dropout is reproducible from the seed and scales kept entries") {
  Rng rng1(99), rng2(99);
  Mat x(4, 8, 1.0);
  Graph g(false);
  const Mat& d1 = g.dropout(g.constant(x), 0.5, rng1).val();
  const Mat& d2 = g.dropout(g.constant(x), 0.5, rng2).val();
  for (size_t i = 0; i < d1.size(); ++i) {
    CHECK(d1.a[i] == d2.a[i]);
    CHECK((d1.a[i] == 0.0 || d1.a[i] == doctest::Approx(2.0)));
  }
}

TEST_CASE("backward through a composite expression matches finite differences") {
  Rng rng(77);
  Param W1("W1", random_mat(4, 5, rng, 0.5));
  Param b1("b1", random_mat(1, 5, rng, 0.1));
  Param W2("W2", random_mat(5, 2, rng, 0.5));
  Mat x = random_mat(3, 4, rng);
  auto build = [&](Graph& g) {
    Var h = g.gelu(g.add_rowvec(g.matmul(g.constant(x), g.leaf(W1)), g.leaf(b1)));
    Var pooled = g.maxpool_rows(h, {1, 1, 1});
    Var probs = g.softmax_rows(g.matmul(pooled, g.leaf(W2)));
    return g.cross_entropy(probs, 0);
  };
  check_param_grads(build, W1);
  check_param_grads(build, b1);
  check_param_grads(build, W2);
}

TEST_CASE("rng normal moments are sane") {
  Rng rng(123);
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sum2 += v * v;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

}  // TEST_SUITE
