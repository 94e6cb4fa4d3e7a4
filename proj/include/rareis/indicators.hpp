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

#ifndef RAREIS_INDICATORS_HPP
#define RAREIS_INDICATORS_HPP

#include <Eigen/Core>

namespace rareis {

/// Smooth stand-ins for the failure indicator: a scaled logistic in g/s or
/// the standard Gaussian CDF of -g/s. Logistic is the default (more robust
/// at small smoothing); GaussianCdf is kept behind a config switch.
enum class SmoothIndicatorKind { Logistic, GaussianCdf };

/// Exact failure indicator, 1 iff g <= 0. NaN signals InvalidLsfValue.
int indicator(double g_value);

/// f(g; s) in [0, 1], strictly decreasing in g, -> indicator as s -> 0.
/// s = +inf returns 0.5 for every g. s <= 0 signals InvalidSmoothing.
double smooth_indicator(double g_value, double s, SmoothIndicatorKind kind);

/// ln f(g; s), stable for deep tails (no underflow until f itself is
/// unrepresentable in the linear domain).
double log_smooth_indicator(double g_value, double s, SmoothIndicatorKind kind);

/// d ln f / dg. Multiplying by grad g gives the gradient of the log-smooth
/// indicator. Finite for all finite g; the GaussianCdf branch uses the
/// stable Mills-ratio tail, never a naive Phi division.
double dlog_smooth_indicator_dg(double g_value, double s, SmoothIndicatorKind kind);

Eigen::VectorXd grad_log_smooth_indicator(double g_value, const Eigen::VectorXd& grad_g,
                                          double s, SmoothIndicatorKind kind);

}  // namespace rareis

#endif  // RAREIS_INDICATORS_HPP
