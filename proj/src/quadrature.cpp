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

#include "rareis/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "rareis/errors.hpp"

namespace rareis {

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  // Jacobi matrix of the Legendre recurrence; its eigenvalues are the nodes
  // on [-1, 1] and 2 * (first eigenvector component)^2 the weights.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double off = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  if (solver.info() != Eigen::Success)
    throw EigenFailure("gauss_legendre: Jacobi eigensolve failed");

  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  Eigen::VectorXd nodes(n), weights(n);
  for (int i = 0; i < n; ++i) {
    nodes(i) = mid + half * solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    weights(i) = 2.0 * v0 * v0 * half;
  }
  return {nodes, weights};
}

namespace {

struct PanelRules {
  Eigen::VectorXd n15, w15, n7, w7;
  PanelRules() {
    std::tie(n15, w15) = gauss_legendre(15, -1.0, 1.0);
    std::tie(n7, w7) = gauss_legendre(7, -1.0, 1.0);
  }
};

const PanelRules& panel_rules() {
  static const PanelRules rules;
  return rules;
}

double quad_recurse(const std::function<double(double)>& f, double a, double b, double tol,
                    int depth) {
  const PanelRules& r = panel_rules();
  const double h = 0.5 * (b - a);
  const double c = 0.5 * (a + b);
  double fine = 0.0, coarse = 0.0;
  for (int i = 0; i < 15; ++i) fine += r.w15(i) * f(c + h * r.n15(i));
  for (int i = 0; i < 7; ++i) coarse += r.w7(i) * f(c + h * r.n7(i));
  fine *= h;
  coarse *= h;
  if (std::abs(fine - coarse) <= tol || depth >= 48) return fine;
  return quad_recurse(f, a, c, 0.5 * tol, depth + 1) +
         quad_recurse(f, c, b, 0.5 * tol, depth + 1);
}

}  // namespace

double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double abs_tol) {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("adaptive_quadrature: tol must be > 0");
  return quad_recurse(f, a, b, abs_tol, 0);
}

}  // namespace rareis
