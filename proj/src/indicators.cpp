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

#include "rareis/indicators.hpp"

#include <cmath>
#include <limits>

#include "rareis/errors.hpp"
#include "rareis/normal.hpp"

namespace rareis {

namespace {

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

void check_smoothing(double s) {
  if (std::isnan(s) || s <= 0.0) throw InvalidSmoothing("smoothing parameter must be positive");
}

}  // namespace

int indicator(double g_value) {
  if (std::isnan(g_value)) throw InvalidLsfValue("indicator: NaN limit-state value");
  return g_value <= 0.0 ? 1 : 0;
}

double smooth_indicator(double g_value, double s, SmoothIndicatorKind kind) {
  check_smoothing(s);
  if (std::isnan(g_value)) throw InvalidLsfValue("smooth_indicator: NaN limit-state value");
  if (std::isinf(s)) return 0.5;
  const double z = g_value / s;
  if (kind == SmoothIndicatorKind::Logistic) {
    // 0.5 (1 + tanh(-z)) written as a sigmoid so small values do not flush
    // to zero at tanh saturation.
    if (z >= 0.0) {
      const double e = std::exp(-2.0 * z);
      return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(2.0 * z));
  }
  return std_normal_cdf(-z);
}

double log_smooth_indicator(double g_value, double s, SmoothIndicatorKind kind) {
  check_smoothing(s);
  if (std::isnan(g_value)) throw InvalidLsfValue("log_smooth_indicator: NaN limit-state value");
  if (std::isinf(s)) return std::log(0.5);
  const double z = g_value / s;
  if (kind == SmoothIndicatorKind::Logistic) return -softplus(2.0 * z);
  return log_std_normal_cdf(-z);
}

double dlog_smooth_indicator_dg(double g_value, double s, SmoothIndicatorKind kind) {
  check_smoothing(s);
  if (std::isinf(s)) throw InvalidSmoothing("dlog_smooth_indicator_dg: s must be finite");
  if (!std::isfinite(g_value))
    throw InvalidLsfValue("dlog_smooth_indicator_dg: non-finite limit-state value");
  const double z = g_value / s;
  if (kind == SmoothIndicatorKind::Logistic) return -(1.0 + std::tanh(z)) / s;
  return -mills_ratio_lower(-z) / s;
}

Eigen::VectorXd grad_log_smooth_indicator(double g_value, const Eigen::VectorXd& grad_g,
                                          double s, SmoothIndicatorKind kind) {
  if (!grad_g.allFinite())
    throw InvalidLsfValue("grad_log_smooth_indicator: non-finite gradient");
  return dlog_smooth_indicator_dg(g_value, s, kind) * grad_g;
}

}  // namespace rareis
