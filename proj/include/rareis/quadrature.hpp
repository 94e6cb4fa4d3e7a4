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

#ifndef RAREIS_QUADRATURE_HPP
#define RAREIS_QUADRATURE_HPP

#include <functional>
#include <utility>

#include <Eigen/Core>

namespace rareis {

/// Gauss-Legendre nodes and weights on [a, b], computed by Golub-Welsch.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n, double a, double b);

/// Adaptive quadrature of f over [a, b]: a 15-point Gauss-Legendre panel is
/// bisected until it agrees with the embedded 7-point estimate to abs_tol.
double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double abs_tol);

}  // namespace rareis

#endif  // RAREIS_QUADRATURE_HPP
