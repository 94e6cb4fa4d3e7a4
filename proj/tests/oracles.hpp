// Copyright 2026 The rareis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Test-only reference implementations, independent of the library code
// paths they check.

#ifndef RAREIS_TESTS_ORACLES_HPP
#define RAREIS_TESTS_ORACLES_HPP

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rareis/rng.hpp"

namespace rareis::testing {

/// Weighted Gaussian MLE evaluated term by term in extended precision.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> weighted_mle_longdouble(
    const Eigen::MatrixXd& samples, const Eigen::VectorXd& weights) {
  const auto n = samples.rows();
  const auto k = samples.cols();
  long double w_sum = 0.0L;
  for (Eigen::Index i = 0; i < n; ++i) w_sum += static_cast<long double>(weights(i));
  std::vector<long double> mean(k, 0.0L);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      mean[j] += static_cast<long double>(weights(i)) * static_cast<long double>(samples(i, j));
  for (Eigen::Index j = 0; j < k; ++j) mean[j] /= w_sum;

  std::vector<long double> cov(k * k, 0.0L);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < k; ++b)
        cov[a * k + b] += static_cast<long double>(weights(i)) *
                          (static_cast<long double>(samples(i, a)) - mean[a]) *
                          (static_cast<long double>(samples(i, b)) - mean[b]);

  Eigen::VectorXd mean_out(k);
  Eigen::MatrixXd cov_out(k, k);
  for (Eigen::Index j = 0; j < k; ++j) mean_out(j) = static_cast<double>(mean[j]);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b)
      cov_out(a, b) = static_cast<double>(cov[a * k + b] / w_sum);
  return {mean_out, cov_out};
}

/// Random orthonormal d x d matrix (QR of a Gaussian matrix, deterministic
/// sign normalization so the factorization is unique).
inline Eigen::MatrixXd random_orthonormal(int d, NormalRng& rng) {
  Eigen::MatrixXd a(d, d);
  rng.fill_normal(a);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

/// Central finite difference of a scalar function.
inline double central_diff(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Analytic eigenvalues of the operator sigma^2 exp(-|x-y|/ell) on an
/// interval of length len: roots of the characteristic equations for the
/// exponential kernel, found by bisection. Returned sorted descending.
inline std::vector<double> exp_kernel_eigvals_analytic(double len, double ell, double sigma,
                                                       int count) {
  const double a = 0.5 * len;  // the classic result is stated on [-a, a]
  const double c = 1.0 / ell;
  std::vector<double> roots;  // values of w > 0

  // Even modes: tan(w a) = c / w, one root per branch
  // w a in (n pi, n pi + pi/2). Odd modes: tan(w a) = -w / c, one root per
  // branch w a in (n pi + pi/2, (n+1) pi).
  auto bisect = [](const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fmid = f(mid);
      if ((flo < 0.0) == (fmid < 0.0)) {
        lo = mid;
        flo = fmid;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  const double eps_b = 1e-9;
  for (int n_branch = 0; static_cast<int>(roots.size()) < 2 * count; ++n_branch) {
    const double base = n_branch * M_PI;
    const auto even = [&](double w) { return std::tan(w * a) - c / w; };
    roots.push_back(bisect(even, (base + eps_b) / a, (base + M_PI_2 - eps_b) / a));
    const auto odd = [&](double w) { return std::tan(w * a) + w / c; };
    roots.push_back(bisect(odd, (base + M_PI_2 + eps_b) / a, (base + M_PI - eps_b) / a));
  }

  std::vector<double> vals;
  vals.reserve(roots.size());
  for (const double w : roots) vals.push_back(sigma * sigma * 2.0 * c / (w * w + c * c));
  std::sort(vals.begin(), vals.end(), std::greater<>());
  vals.resize(count);
  return vals;
}

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (const double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sd_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double s = 0.0;
  for (const double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace rareis::testing

#endif  // RAREIS_TESTS_ORACLES_HPP
