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

#ifndef RAREIS_PROBLEMS_HPP
#define RAREIS_PROBLEMS_HPP

#include <functional>
#include <optional>
#include <utility>

#include <Eigen/Core>

namespace rareis {

/// A limit-state function over standard Gaussian inputs: failure is g <= 0.
/// gradient may be empty for methods that do not need it.
struct LimitStateProblem {
  int dim = 0;
  std::function<double(const Eigen::VectorXd&)> evaluate;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::optional<double> reference_p;
};

/// g = beta - (1/sqrt(d)) * sum(theta)
struct LinearLsfSpec {
  int dim = 2;
  double beta = 3.5;
};

/// g = beta + (kappa/4)(theta_1 - theta_2)^2 - (1/sqrt(d)) * sum(theta)
struct QuadraticLsfSpec {
  int dim = 2;
  double beta = 4.0;
  double kappa = 5.0;
};

std::pair<double, Eigen::VectorXd> linear_lsf(const Eigen::VectorXd& theta,
                                              const LinearLsfSpec& spec);

/// Exact failure probability Phi(-beta).
double linear_reference(double beta);

std::pair<double, Eigen::VectorXd> quadratic_lsf(const Eigen::VectorXd& theta,
                                                 const QuadraticLsfSpec& spec);

/// Dimension-independent reference probability, reduced to the 1-D integral
/// int Phi(-beta - (kappa/2) v^2) phi(v) dv and evaluated by adaptive
/// Gauss-Legendre quadrature to 1e-12 absolute.
double quadratic_reference(double beta, double kappa);

LimitStateProblem make_linear_problem(const LinearLsfSpec& spec);
LimitStateProblem make_quadratic_problem(const QuadraticLsfSpec& spec);

}  // namespace rareis

#endif  // RAREIS_PROBLEMS_HPP
