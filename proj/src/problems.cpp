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

#include "rareis/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "rareis/errors.hpp"
#include "rareis/normal.hpp"
#include "rareis/quadrature.hpp"

namespace rareis {

std::pair<double, Eigen::VectorXd> linear_lsf(const Eigen::VectorXd& theta,
                                              const LinearLsfSpec& spec) {
  if (theta.size() != spec.dim) throw DimensionMismatch("linear_lsf: dimension mismatch");
  const double c = 1.0 / std::sqrt(static_cast<double>(spec.dim));
  const double g = spec.beta - c * theta.sum();
  return {g, Eigen::VectorXd::Constant(spec.dim, -c)};
}

double linear_reference(double beta) { return std_normal_cdf(-beta); }

std::pair<double, Eigen::VectorXd> quadratic_lsf(const Eigen::VectorXd& theta,
                                                 const QuadraticLsfSpec& spec) {
  if (spec.dim < 2) throw DimensionMismatch("quadratic_lsf: dimension must be >= 2");
  if (theta.size() != spec.dim) throw DimensionMismatch("quadratic_lsf: dimension mismatch");
  const double c = 1.0 / std::sqrt(static_cast<double>(spec.dim));
  const double diff = theta(0) - theta(1);
  const double g = spec.beta + 0.25 * spec.kappa * diff * diff - c * theta.sum();
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(spec.dim, -c);
  grad(0) += 0.5 * spec.kappa * diff;
  grad(1) -= 0.5 * spec.kappa * diff;
  return {g, grad};
}

double quadratic_reference(double beta, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("quadratic_reference: kappa must be >= 0");
  if (kappa == 0.0) return linear_reference(beta);
  // Failure iff u >= beta + (kappa/2) v^2 for independent standard normal
  // (u, v) = ((1/sqrt(d)) sum theta, (theta_1 - theta_2)/sqrt(2)).
  const auto integrand = [beta, kappa](double v) {
    return std_normal_pdf(v) * std_normal_cdf(-beta - 0.5 * kappa * v * v);
  };
  // Even in v; the integrand decays as exp(-v^2/2) times a Gaussian tail,
  // negligible beyond v = 40 at any representable probability.
  return 2.0 * adaptive_quadrature(integrand, 0.0, 40.0, 0.5e-12);
}

LimitStateProblem make_linear_problem(const LinearLsfSpec& spec) {
  LimitStateProblem problem;
  problem.dim = spec.dim;
  problem.evaluate = [spec](const Eigen::VectorXd& theta) { return linear_lsf(theta, spec).first; };
  problem.gradient = [spec](const Eigen::VectorXd& theta) {
    return linear_lsf(theta, spec).second;
  };
  problem.reference_p = linear_reference(spec.beta);
  return problem;
}

LimitStateProblem make_quadratic_problem(const QuadraticLsfSpec& spec) {
  LimitStateProblem problem;
  problem.dim = spec.dim;
  problem.evaluate = [spec](const Eigen::VectorXd& theta) {
    return quadratic_lsf(theta, spec).first;
  };
  problem.gradient = [spec](const Eigen::VectorXd& theta) {
    return quadratic_lsf(theta, spec).second;
  };
  problem.reference_p = quadratic_reference(spec.beta, spec.kappa);
  return problem;
}

}  // namespace rareis
