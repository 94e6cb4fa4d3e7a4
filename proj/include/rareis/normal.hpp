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

#ifndef RAREIS_NORMAL_HPP
#define RAREIS_NORMAL_HPP

#include <cmath>

namespace rareis {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;

inline double std_normal_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

/// Phi(x) via erfc; relative accuracy ~1e-15 down to the erfc underflow
/// limit (x ~ -37.5), exact 0 below it.
inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

/// Inverse Mills ratio phi(z)/Phi(z). The naive quotient is fine while
/// Phi(z) stays representable; for z < -8 the Laplace continued fraction
/// for the tail is used instead, which never under/overflows and keeps the
/// relative error at machine precision across the switch.
inline double mills_ratio_lower(double z) {
  if (z >= -8.0) {
    const double c = std_normal_cdf(z);
    return std_normal_pdf(z) / c;
  }
  const double t = -z;
  // phi(t)/Phi(-t) = t + 1/(t + 2/(t + 3/(t + ...))), evaluated backward.
  double v = t;
  for (int k = 40; k >= 1; --k) v = t + static_cast<double>(k) / v;
  return v;
}

/// ln Phi(x), stable for arbitrarily deep lower tails.
inline double log_std_normal_cdf(double x) {
  if (x >= -8.0) {
    const double c = std_normal_cdf(x);
    if (c >= 1.0) return 0.0;
    return std::log(c);
  }
  // ln Phi(x) = ln phi(x) - ln(phi/Phi)
  const double logpdf = -0.5 * x * x - 0.5 * kLog2Pi;
  return logpdf - std::log(mills_ratio_lower(x));
}

}  // namespace rareis

#endif  // RAREIS_NORMAL_HPP
