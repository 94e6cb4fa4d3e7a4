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

#ifndef RAREIS_RANDFIELD_HPP
#define RAREIS_RANDFIELD_HPP

#include <memory>
#include <utility>

#include <Eigen/Core>

#include "rareis/problems.hpp"

namespace rareis {

/// exp(-|x - y| / ell), the isotropic exponential autocorrelation kernel.
double exp_kernel(double x, double y, double ell);

/// Truncated spectral representation of a lognormal random field: eigenpairs
/// of the covariance operator sigma_gauss^2 * exp_kernel discretized with the
/// Nystrom method on Gauss-Legendre nodes.
struct KLExpansion {
  Eigen::VectorXd nodes;         // n_gp quadrature points
  Eigen::VectorXd quad_weights;  // Gauss-Legendre weights
  Eigen::VectorXd eigvals;       // K, nonincreasing, positive
  Eigen::MatrixXd eigfuncs;      // n_gp x K, values at nodes
  double mu_lognormal = 0.0;
  double sigma_lognormal = 0.0;
  double mu_gauss = 0.0;
  double sigma_gauss = 0.0;
  double ell = 0.0;
  double domain_length = 0.0;

  int n_terms() const { return static_cast<int>(eigvals.size()); }

  /// Fraction of the field variance carried by the retained terms.
  double captured_variance_ratio() const;

  /// Nystrom interpolation of the eigenfunctions at arbitrary points
  /// (rows: points, cols: modes).
  Eigen::MatrixXd interpolate_eigfuncs(const Eigen::VectorXd& points) const;
};

/// Builds the expansion on [a, b]. The discrete eigenproblem is solved in the
/// symmetrized form W^{1/2} C W^{1/2}, so the retained eigenfunctions are
/// orthonormal under the quadrature inner product.
KLExpansion nystrom_kl(double a, double b, double ell, double sigma_gauss, int n_gp, int n_terms);

/// Field values at the expansion nodes: exp(mu_gauss + sum_k sqrt(a_k) phi_k theta_k).
Eigen::VectorXd realize_lognormal_field(const KLExpansion& kl, const Eigen::VectorXd& theta_kl);

/// Axial elastic bar on [0, L], clamped at x = 0, tip point load
/// q = load_mean + load_std * theta_q, Young's modulus a lognormal field
/// realized per element at midpoints. Failure: tip displacement > u_max.
/// Stochastic dimension d = K + 1; component 0 is the standardized load.
struct BarProblem {
  double length = 1.0;
  double area = 1e-4;
  int n_elem = 100;
  KLExpansion kl;
  double load_mean = 12.0;
  double load_std = 2.4;
  double u_max = 1.0;

  Eigen::MatrixXd a_mid;  // n_elem x K: sqrt(a_k) phi_k at element midpoints

  int dim() const { return kl.n_terms() + 1; }
};

struct BarConfig {
  double length = 1.0;
  double area = 1e-4;
  int n_elem = 100;
  int n_kl_terms = 50;
  int n_gp = 200;
  double ell = 0.1;
  double mu_lognormal = 2.0e5;
  double sigma_lognormal = 3.0e4;
  double load_mean = 12.0;
  double load_std = 2.4;
  double u_max = 1.0;
};

std::shared_ptr<BarProblem> build_bar_problem(const BarConfig& config);

/// g = u_max - u(L) with the adjoint gradient of the discrete tip
/// displacement. One forward and one adjoint tridiagonal solve per call;
/// dK/dtheta contributions accumulate element-wise.
std::pair<double, Eigen::VectorXd> bar_lsf(const Eigen::VectorXd& theta, const BarProblem& bar);

/// Forward solve only (used when the gradient is not needed).
double bar_tip_displacement(const Eigen::VectorXd& theta, const BarProblem& bar);

LimitStateProblem make_bar_limit_state(std::shared_ptr<BarProblem> bar);

}  // namespace rareis

#endif  // RAREIS_RANDFIELD_HPP
