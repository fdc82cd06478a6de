// Shared test utilities: independent oracles and small fixtures. Everything
// here must stay independent of the implementation paths it checks.
#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "scrn/common.hpp"
#include "scrn/mat.hpp"

namespace scrn::test {

// Central-difference derivative of f at x along coordinate k of `values`.
inline double central_diff(const std::function<double()>& f, double& coord,
                           double step = 1e-6) {
  const double saved = coord;
  coord = saved + step;
  const double up = f();
  coord = saved - step;
  const double dn = f();
  coord = saved;
  return (up - dn) / (2.0 * step);
}

// Plain-loop KL oracle over two-class distributions (natural log).
inline double kl_oracle(const std::vector<double>& p, const std::vector<double>& q,
                        double floor = 1e-12) {
  double s = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    const double pi = std::max(p[i], floor);
    const double qi = std::max(q[i], floor);
    s += pi * (std::log(pi) - std::log(qi));
  }
  return s;
}

inline double sym_kl_oracle(const std::vector<double>& p, const std::vector<double>& q) {
  return 0.5 * (kl_oracle(p, q) + kl_oracle(q, p));
}

// Golden-section minimizer for smooth 1-d functions on [lo, hi].
inline double golden_minimize(const std::function<double(double)>& f, double lo,
                              double hi, double tol = 1e-10) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  while (std::abs(b - a) > tol) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - gr * (b - a);
    d = a + gr * (b - a);
  }
  return 0.5 * (a + b);
}

inline Mat random_mat(size_t r, size_t c, Rng& rng, double scale = 1.0) {
  Mat m(r, c);
  for (double& v : m.a) v = rng.normal() * scale;
  return m;
}

// Temporary directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("scrn_test_" + tag + "_" + std::to_string(counter_++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

}  // namespace scrn::test
