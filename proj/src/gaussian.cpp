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

#include "rareis/gaussian.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "rareis/errors.hpp"
#include "rareis/normal.hpp"

namespace rareis {

namespace {

Eigen::MatrixXd try_llt(const Eigen::MatrixXd& cov, double jitter, bool& ok) {
  Eigen::MatrixXd work = cov;
  work.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(work);
  ok = (llt.info() == Eigen::Success);
  if (!ok) return {};
  Eigen::MatrixXd l = llt.matrixL();
  ok = l.allFinite();
  return l;
}

}  // namespace

Eigen::MatrixXd chol_factor(const Eigen::MatrixXd& cov) {
  const auto k = cov.rows();
  if (k == 0 || cov.cols() != k) throw DimensionMismatch("chol_factor: covariance not square");
  const double scale = cov.trace() / static_cast<double>(k);
  const double jit1 = std::max(1e-10 * scale, 1e-300);
  bool ok = false;
  Eigen::MatrixXd l = try_llt(cov, jit1, ok);
  if (ok) return l;
  const double jit2 = std::max(1e-6 * scale, 1e-300);
  l = try_llt(cov, jit2, ok);
  if (ok) return l;
  throw DegenerateCovariance("covariance not positive definite after jitter retry");
}

double gaussian_logpdf(const Eigen::VectorXd& x, const GaussianParams& params) {
  if (x.size() != params.mean.size())
    throw DimensionMismatch("gaussian_logpdf: point/mean dimension mismatch");
  return gaussian_logpdf_cols(x, params)(0);
}

Eigen::VectorXd gaussian_logpdf_cols(const Eigen::MatrixXd& x, const GaussianParams& params) {
  const auto k = params.mean.size();
  if (x.rows() != k) throw DimensionMismatch("gaussian_logpdf_cols: dimension mismatch");
  if (params.cov.rows() != k || params.cov.cols() != k)
    throw DimensionMismatch("gaussian_logpdf_cols: covariance shape mismatch");

  const Eigen::MatrixXd l = chol_factor(params.cov);
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) logdet += std::log(l(i, i));

  Eigen::MatrixXd centered = x.colwise() - params.mean;
  // Solve L y = (x - mu) per column; |y|^2 is the Mahalanobis square.
  l.triangularView<Eigen::Lower>().solveInPlace(centered);
  const double constant = -0.5 * static_cast<double>(k) * kLog2Pi - logdet;
  return (-0.5 * centered.colwise().squaredNorm().array() + constant).matrix().transpose();
}

Eigen::MatrixXd sample_gaussian(const GaussianParams& params, int n, NormalRng& rng) {
  if (n < 1) throw std::invalid_argument("sample_gaussian: n must be >= 1");
  const auto k = params.mean.size();
  const Eigen::MatrixXd l = chol_factor(params.cov);
  Eigen::MatrixXd out(n, k);
  Eigen::VectorXd z(k);
  for (int i = 0; i < n; ++i) {
    rng.fill_normal(z);
    out.row(i) = (params.mean + l * z).transpose();
  }
  return out;
}

GaussianParams fit_gaussian_weighted(const Eigen::MatrixXd& samples,
                                     const Eigen::VectorXd& weights) {
  const auto n = samples.rows();
  const auto k = samples.cols();
  if (weights.size() != n) throw DimensionMismatch("fit_gaussian_weighted: weight count mismatch");
  if (!weights.allFinite() || (weights.array() < 0.0).any())
    throw std::invalid_argument("fit_gaussian_weighted: weights must be finite and nonnegative");
  const double w_sum = weights.sum();
  if (!(w_sum > 0.0)) throw AllWeightsZero("fit_gaussian_weighted: sum of weights is zero");

  GaussianParams out;
  out.mean = (samples.transpose() * weights) / w_sum;
  const Eigen::MatrixXd centered = samples.rowwise() - out.mean.transpose();
  const Eigen::MatrixXd scaled =
      (weights / w_sum).cwiseSqrt().asDiagonal() * centered;  // sqrt-weighted rows
  out.cov = scaled.transpose() * scaled;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  (void)k;
  return out;
}

double composite_logpdf(const Eigen::VectorXd& theta_tilde, const CompositeBiasing& biasing) {
  const int r = biasing.reduced.dim();
  const int d = biasing.full_dim;
  if (theta_tilde.size() != d)
    throw DimensionMismatch("composite_logpdf: point dimension mismatch");
  if (r > d) throw DimensionMismatch("composite_logpdf: reduced dimension exceeds full");
  double lp = gaussian_logpdf(theta_tilde.head(r), biasing.reduced);
  if (r < d) {
    const auto tail = theta_tilde.tail(d - r);
    lp += -0.5 * static_cast<double>(d - r) * kLog2Pi - 0.5 * tail.squaredNorm();
  }
  return lp;
}

GaussianParams adjust_reference_params(const GaussianParams& reduced,
                                       const FisBasis& basis_old, const FisBasis& basis_new) {
  const auto d = basis_old.phi_r.rows();
  if (basis_new.phi_r.rows() != d)
    throw DimensionMismatch("adjust_reference_params: ambient dimensions differ");
  if (reduced.dim() != basis_old.rank)
    throw DimensionMismatch("adjust_reference_params: reduced dim != old basis rank");

  const Eigen::VectorXd mean_global = basis_old.phi_r * reduced.mean;
  // Full-space covariance of the old composite density:
  // Phi_r S_r Phi_r^T on the FIS plus the identity on the complement.
  Eigen::MatrixXd cov_global = basis_old.phi_r * reduced.cov * basis_old.phi_r.transpose();
  cov_global += basis_old.phi_perp * basis_old.phi_perp.transpose();

  Eigen::MatrixXd b_new(d, d);
  b_new.leftCols(basis_new.rank) = basis_new.phi_r;
  b_new.rightCols(d - basis_new.rank) = basis_new.phi_perp;

  GaussianParams out;
  out.mean = b_new.transpose() * mean_global;
  out.cov = b_new.transpose() * cov_global * b_new;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

}  // namespace rareis
