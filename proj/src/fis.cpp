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

#include "rareis/fis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "rareis/errors.hpp"

namespace rareis {

namespace {

// Largest-magnitude entry of each column made positive (first index wins on
// ties), so eigenbases are reproducible across runs and platforms.
void fix_column_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index imax = 0;
    double amax = -1.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double a = std::abs(m(i, j));
      if (a > amax) {
        amax = a;
        imax = i;
      }
    }
    if (m(imax, j) < 0.0) m.col(j) = -m.col(j);
  }
}

void clip_negative_eigvals(Eigen::VectorXd& vals) {
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals(i) < 0.0) vals(i) = 0.0;
}

}  // namespace

Eigen::MatrixXd estimate_grad_second_moment(const Eigen::MatrixXd& grad_log_f,
                                            const Eigen::VectorXd& weights) {
  const auto n = grad_log_f.rows();
  if (weights.size() != n)
    throw DimensionMismatch("estimate_grad_second_moment: weight count mismatch");
  if (!grad_log_f.allFinite())
    throw InvalidLsfValue("estimate_grad_second_moment: non-finite gradients");
  const double w_sum = weights.sum();
  if (!(w_sum > 0.0)) throw AllWeightsZero("estimate_grad_second_moment: zero weight sum");

  const Eigen::MatrixXd scaled = (weights / w_sum).cwiseSqrt().asDiagonal() * grad_log_f;
  Eigen::MatrixXd h = scaled.transpose() * scaled;
  h = 0.5 * (h + h.transpose()).eval();
  return h;
}

int select_rank(const Eigen::VectorXd& eigvals, double eps) {
  const int d = static_cast<int>(eigvals.size());
  // Backward cumulative tail sums; smallest r >= 1 with half-tail <= eps.
  double tail = 0.0;
  int r = d;
  for (int i = d - 1; i >= 1; --i) {
    tail += eigvals(i);
    if (0.5 * tail <= eps)
      r = i;
    else
      break;
  }
  return std::max(r, 1);
}

FisBasis compute_fis_basis(const Eigen::MatrixXd& h, double eps, int max_rank) {
  const auto d = h.rows();
  if (h.cols() != d) throw DimensionMismatch("compute_fis_basis: matrix not square");
  const Eigen::MatrixXd sym = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw EigenFailure("compute_fis_basis: eigensolver did not converge");

  FisBasis basis;
  basis.eigvals = solver.eigenvalues().reverse();
  Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();
  clip_negative_eigvals(basis.eigvals);
  fix_column_signs(vectors);

  basis.rank = select_rank(basis.eigvals, eps);
  if (max_rank > 0) basis.rank = std::min(basis.rank, max_rank);
  basis.rank = std::max(basis.rank, 1);
  basis.phi_r = vectors.leftCols(basis.rank);
  basis.phi_perp = vectors.rightCols(d - basis.rank);
  return basis;
}

LeadingBasis compute_leading_basis(const Eigen::MatrixXd& grad_log_f,
                                   const Eigen::VectorXd& weights, double eps, int max_rank,
                                   int n_lead_min) {
  const auto n = grad_log_f.rows();
  const auto d = grad_log_f.cols();
  if (weights.size() != n)
    throw DimensionMismatch("compute_leading_basis: weight count mismatch");
  const double w_sum = weights.sum();
  if (!(w_sum > 0.0)) throw AllWeightsZero("compute_leading_basis: zero weight sum");

  // Gram dual: the N x N matrix M M^T shares the nonzero spectrum of
  // M^T M = H, with right vectors recovered as M^T u / sqrt(lambda).
  const Eigen::MatrixXd m = (weights / w_sum).cwiseSqrt().asDiagonal() * grad_log_f;
  const Eigen::MatrixXd gram = m * m.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success)
    throw EigenFailure("compute_leading_basis: eigensolver did not converge");

  Eigen::VectorXd vals = solver.eigenvalues().reverse();
  clip_negative_eigvals(vals);

  LeadingBasis out;
  out.eigvals = Eigen::VectorXd::Zero(d);
  out.eigvals.head(std::min(n, d)) = vals.head(std::min(n, d));

  out.rank = select_rank(out.eigvals, eps);
  if (max_rank > 0) out.rank = std::min(out.rank, max_rank);
  out.rank = std::max(out.rank, 1);

  int n_lead = std::max(out.rank, n_lead_min);
  n_lead = std::min<int>(n_lead, static_cast<int>(std::min(n, d)));
  const double floor_val = 1e-14 * std::max(vals(0), 1e-300);
  out.vectors = Eigen::MatrixXd::Zero(d, n_lead);
  const Eigen::MatrixXd u = solver.eigenvectors().rowwise().reverse();
  for (int j = 0; j < n_lead; ++j) {
    if (vals(j) <= floor_val) {
      n_lead = j;
      break;
    }
    out.vectors.col(j) = m.transpose() * u.col(j) / std::sqrt(vals(j));
    out.vectors.col(j).normalize();
  }
  if (n_lead == 0) {
    // Degenerate level (all gradients vanish): any direction is as good.
    out.vectors = Eigen::MatrixXd::Zero(d, 1);
    out.vectors(0, 0) = 1.0;
    out.rank = 1;
    return out;
  }
  out.vectors.conservativeResize(d, n_lead);
  out.rank = std::min(out.rank, n_lead);
  fix_column_signs(out.vectors);
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> project(const Eigen::MatrixXd& theta,
                                                    const FisBasis& basis) {
  if (theta.rows() != basis.phi_r.rows())
    throw DimensionMismatch("project: sample dimension mismatch");
  return {basis.phi_r.transpose() * theta, basis.phi_perp.transpose() * theta};
}

Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& theta_r_local,
                            const Eigen::MatrixXd& theta_perp_local, const FisBasis& basis) {
  if (theta_r_local.rows() != basis.rank ||
      theta_perp_local.rows() != basis.phi_perp.cols() ||
      theta_r_local.cols() != theta_perp_local.cols())
    throw DimensionMismatch("reconstruct: coordinate block shape mismatch");
  return basis.phi_r * theta_r_local + basis.phi_perp * theta_perp_local;
}

}  // namespace rareis
