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

#ifndef RAREIS_FIS_HPP
#define RAREIS_FIS_HPP

#include <utility>

#include <Eigen/Core>

namespace rareis {

/// Orthonormal split of R^d into the failure-informed subspace (span of the
/// leading eigenvectors of the gradient second-moment matrix) and its
/// complement. [phi_r | phi_perp] is an orthonormal basis of R^d.
struct FisBasis {
  Eigen::VectorXd eigvals;   // length d, nonincreasing, nonnegative
  int rank = 0;              // r in [1, d]
  Eigen::MatrixXd phi_r;     // d x r
  Eigen::MatrixXd phi_perp;  // d x (d - r)
};

/// Self-normalized weighted second moment of the gradient rows:
/// (1/sum w) * sum_i w_i g_i g_i^T, symmetrized before return.
/// grad_log_f holds one gradient per row (N x d).
Eigen::MatrixXd estimate_grad_second_moment(const Eigen::MatrixXd& grad_log_f,
                                            const Eigen::VectorXd& weights);

/// Smallest r >= 1 with 0.5 * sum_{i>r} eigvals[i] <= eps; d if none.
int select_rank(const Eigen::VectorXd& eigvals, double eps);

/// Full eigendecomposition of a symmetric matrix with descending eigenvalues,
/// deterministic sign convention (largest-magnitude entry of each eigenvector
/// made positive) and rank from select_rank. Negative roundoff eigenvalues
/// are clipped to zero. max_rank > 0 additionally caps the selected rank.
FisBasis compute_fis_basis(const Eigen::MatrixXd& h, double eps, int max_rank = 0);

/// Leading eigenpairs of the same second-moment matrix computed from its
/// N x N Gram dual, without forming the d x d matrix. Returns eigvals padded
/// with exact zeros to length d and only the leading `n_lead` eigenvectors
/// (at least the selected rank). Intended for d >> N levels; agrees with
/// estimate_grad_second_moment + compute_fis_basis on the shared spectrum.
struct LeadingBasis {
  Eigen::VectorXd eigvals;  // length d
  int rank = 0;
  Eigen::MatrixXd vectors;  // d x n_lead, orthonormal, n_lead >= rank
};
LeadingBasis compute_leading_basis(const Eigen::MatrixXd& grad_log_f,
                                   const Eigen::VectorXd& weights, double eps,
                                   int max_rank = 0, int n_lead_min = 0);

/// theta holds one sample per column (d x N). Returns local FIS and CS
/// coordinates (r x N, (d-r) x N).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> project(const Eigen::MatrixXd& theta,
                                                    const FisBasis& basis);

Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& theta_r_local,
                            const Eigen::MatrixXd& theta_perp_local,
                            const FisBasis& basis);

}  // namespace rareis

#endif  // RAREIS_FIS_HPP
