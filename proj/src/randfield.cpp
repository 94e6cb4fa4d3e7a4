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

#include "rareis/randfield.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "rareis/errors.hpp"
#include "rareis/quadrature.hpp"

namespace rareis {

double exp_kernel(double x, double y, double ell) {
  if (!(ell > 0.0)) throw std::invalid_argument("exp_kernel: correlation length must be > 0");
  return std::exp(-std::abs(x - y) / ell);
}

double KLExpansion::captured_variance_ratio() const {
  const double trace = sigma_gauss * sigma_gauss * domain_length;
  return eigvals.sum() / trace;
}

Eigen::MatrixXd KLExpansion::interpolate_eigfuncs(const Eigen::VectorXd& points) const {
  const auto np = points.size();
  const int k = n_terms();
  // phi_k(x) = (1/a_k) sum_j w_j C(x, x_j) phi_k(x_j)
  Eigen::MatrixXd kernel_block(np, nodes.size());
  const double var = sigma_gauss * sigma_gauss;
  for (Eigen::Index i = 0; i < np; ++i)
    for (Eigen::Index j = 0; j < nodes.size(); ++j)
      kernel_block(i, j) = var * exp_kernel(points(i), nodes(j), ell) * quad_weights(j);
  Eigen::MatrixXd out = kernel_block * eigfuncs;
  for (int m = 0; m < k; ++m) out.col(m) /= eigvals(m);
  return out;
}

KLExpansion nystrom_kl(double a, double b, double ell, double sigma_gauss, int n_gp,
                       int n_terms) {
  if (n_gp < 2) throw std::invalid_argument("nystrom_kl: need at least 2 quadrature points");
  if (n_terms < 1 || n_terms > n_gp)
    throw std::invalid_argument("nystrom_kl: term count must be in [1, n_gp]");

  KLExpansion kl;
  kl.ell = ell;
  kl.sigma_gauss = sigma_gauss;
  kl.domain_length = b - a;
  std::tie(kl.nodes, kl.quad_weights) = gauss_legendre(n_gp, a, b);

  const double var = sigma_gauss * sigma_gauss;
  Eigen::MatrixXd cov(n_gp, n_gp);
  for (int i = 0; i < n_gp; ++i)
    for (int j = 0; j < n_gp; ++j) cov(i, j) = var * exp_kernel(kl.nodes(i), kl.nodes(j), ell);

  // Symmetrized weighted eigenproblem W^{1/2} C W^{1/2} psi = alpha psi with
  // phi_j = psi_j / sqrt(w_j), which keeps the discrete orthonormality
  // sum_j w_j phi_i(x_j) phi_k(x_j) = delta_ik.
  const Eigen::VectorXd sqrt_w = kl.quad_weights.cwiseSqrt();
  Eigen::MatrixXd sym = sqrt_w.asDiagonal() * cov * sqrt_w.asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw EigenFailure("nystrom_kl: eigensolve failed");

  kl.eigvals = solver.eigenvalues().reverse().head(n_terms);
  if (!(kl.eigvals.minCoeff() > 0.0))
    throw EigenFailure("nystrom_kl: retained eigenvalue not positive");
  kl.eigfuncs = solver.eigenvectors().rowwise().reverse().leftCols(n_terms);
  for (int j = 0; j < n_terms; ++j) {
    kl.eigfuncs.col(j) = kl.eigfuncs.col(j).cwiseQuotient(sqrt_w);
    // Deterministic sign: make the first node value positive.
    if (kl.eigfuncs(0, j) < 0.0) kl.eigfuncs.col(j) = -kl.eigfuncs.col(j);
  }
  return kl;
}

Eigen::VectorXd realize_lognormal_field(const KLExpansion& kl, const Eigen::VectorXd& theta_kl) {
  if (theta_kl.size() != kl.n_terms())
    throw DimensionMismatch("realize_lognormal_field: coefficient count mismatch");
  const Eigen::VectorXd log_field =
      Eigen::VectorXd::Constant(kl.nodes.size(), kl.mu_gauss) +
      kl.eigfuncs * kl.eigvals.cwiseSqrt().cwiseProduct(theta_kl);
  return log_field.array().exp();
}

std::shared_ptr<BarProblem> build_bar_problem(const BarConfig& config) {
  if (config.n_elem < 1) throw std::invalid_argument("build_bar_problem: n_elem must be >= 1");
  auto bar = std::make_shared<BarProblem>();
  bar->length = config.length;
  bar->area = config.area;
  bar->n_elem = config.n_elem;
  bar->load_mean = config.load_mean;
  bar->load_std = config.load_std;
  bar->u_max = config.u_max;

  const double mu = config.mu_lognormal;
  const double sd = config.sigma_lognormal;
  const double sigma_gauss = std::sqrt(std::log1p((sd * sd) / (mu * mu)));
  const double mu_gauss = std::log(mu * mu / std::sqrt(mu * mu + sd * sd));

  bar->kl = nystrom_kl(0.0, config.length, config.ell, sigma_gauss, config.n_gp,
                       config.n_kl_terms);
  bar->kl.mu_lognormal = mu;
  bar->kl.sigma_lognormal = sd;
  bar->kl.mu_gauss = mu_gauss;
  bar->kl.sigma_gauss = sigma_gauss;

  const double h = config.length / config.n_elem;
  Eigen::VectorXd midpoints(config.n_elem);
  for (int e = 0; e < config.n_elem; ++e) midpoints(e) = (e + 0.5) * h;
  bar->a_mid = bar->kl.interpolate_eigfuncs(midpoints) *
               bar->kl.eigvals.cwiseSqrt().asDiagonal();
  return bar;
}

namespace {

// Tridiagonal LDL-style (Thomas) solve for the clamped-bar stiffness system.
// stiff holds the per-element axial stiffness E_e A / h; unknowns are the
// displacements of nodes 1..n (node 0 clamped).
Eigen::VectorXd solve_bar_system(const Eigen::VectorXd& stiff, const Eigen::VectorXd& rhs) {
  const auto n = stiff.size();
  Eigen::VectorXd diag(n), lower(n), b = rhs;
  for (Eigen::Index i = 0; i < n; ++i)
    diag(i) = stiff(i) + (i + 1 < n ? stiff(i + 1) : 0.0);
  for (Eigen::Index i = 1; i < n; ++i) lower(i) = -stiff(i);

  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(diag(i - 1) > 0.0)) throw SolveFailure("bar stiffness not positive definite");
    const double m = lower(i) / diag(i - 1);
    diag(i) -= m * lower(i);
    b(i) -= m * b(i - 1);
  }
  Eigen::VectorXd u(n);
  if (!(diag(n - 1) > 0.0)) throw SolveFailure("bar stiffness not positive definite");
  u(n - 1) = b(n - 1) / diag(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) u(i) = (b(i) - lower(i + 1) * u(i + 1)) / diag(i);
  return u;
}

Eigen::VectorXd element_moduli(const Eigen::VectorXd& theta_kl, const BarProblem& bar) {
  const Eigen::VectorXd log_e =
      Eigen::VectorXd::Constant(bar.n_elem, bar.kl.mu_gauss) + bar.a_mid * theta_kl;
  return log_e.array().exp();
}

}  // namespace

double bar_tip_displacement(const Eigen::VectorXd& theta, const BarProblem& bar) {
  if (theta.size() != bar.dim()) throw DimensionMismatch("bar problem: dimension mismatch");
  const double q = bar.load_mean + bar.load_std * theta(0);
  const Eigen::VectorXd moduli = element_moduli(theta.tail(bar.kl.n_terms()), bar);
  if (!moduli.allFinite() || !(moduli.minCoeff() > 0.0))
    throw SolveFailure("bar problem: field realization not positive");
  const double h = bar.length / bar.n_elem;
  const Eigen::VectorXd stiff = moduli * (bar.area / h);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(bar.n_elem);
  rhs(bar.n_elem - 1) = q;
  const Eigen::VectorXd u = solve_bar_system(stiff, rhs);
  return u(bar.n_elem - 1);
}

std::pair<double, Eigen::VectorXd> bar_lsf(const Eigen::VectorXd& theta, const BarProblem& bar) {
  if (theta.size() != bar.dim()) throw DimensionMismatch("bar problem: dimension mismatch");
  const int n = bar.n_elem;
  const int k = bar.kl.n_terms();
  const double q = bar.load_mean + bar.load_std * theta(0);
  const Eigen::VectorXd moduli = element_moduli(theta.tail(k), bar);
  if (!moduli.allFinite() || !(moduli.minCoeff() > 0.0))
    throw SolveFailure("bar problem: field realization not positive");
  const double h = bar.length / n;
  const Eigen::VectorXd stiff = moduli * (bar.area / h);

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = q;
  const Eigen::VectorXd u = solve_bar_system(stiff, rhs);

  // Adjoint of the tip displacement: K is symmetric, rhs = dQoI/du = e_tip.
  Eigen::VectorXd adj_rhs = Eigen::VectorXd::Zero(n);
  adj_rhs(n - 1) = 1.0;
  const Eigen::VectorXd lambda = solve_bar_system(stiff, adj_rhs);

  const double g = bar.u_max - u(n - 1);
  Eigen::VectorXd grad(bar.dim());
  // g = u_max - QoI flips the signs relative to a plain QoI gradient.
  grad(0) = -bar.load_std * lambda(n - 1);

  // lambda^T (dK/dtheta_k) u accumulated element-wise: each element
  // contributes dk_e * (delta u)(delta lambda), dk_e = (A/h) E_e a_mid(e, k).
  Eigen::VectorXd elem_factor(n);
  double u_prev = 0.0, l_prev = 0.0;  // clamped node
  for (int e = 0; e < n; ++e) {
    const double du = u(e) - u_prev;
    const double dl = lambda(e) - l_prev;
    elem_factor(e) = (bar.area / h) * moduli(e) * du * dl;
    u_prev = u(e);
    l_prev = lambda(e);
  }
  grad.tail(k) = bar.a_mid.transpose() * elem_factor;
  return {g, grad};
}

LimitStateProblem make_bar_limit_state(std::shared_ptr<BarProblem> bar) {
  LimitStateProblem problem;
  problem.dim = bar->dim();
  problem.evaluate = [bar](const Eigen::VectorXd& theta) {
    return bar->u_max - bar_tip_displacement(theta, *bar);
  };
  problem.gradient = [bar](const Eigen::VectorXd& theta) { return bar_lsf(theta, *bar).second; };
  return problem;
}

}  // namespace rareis
