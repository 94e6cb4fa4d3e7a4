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

#ifndef RAREIS_ESTIMATORS_HPP
#define RAREIS_ESTIMATORS_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "rareis/gaussian.hpp"
#include "rareis/indicators.hpp"
#include "rareis/problems.hpp"
#include "rareis/rng.hpp"

namespace rareis {

struct SolverConfig {
  int n_per_level = 1000;        // N
  double delta = 1.5;            // target cv for smoothing adaptation
  double eps = 0.01;             // FIS tolerance
  double delta_bar = 0.05;       // refinement target cv of p_hat
  int m_check = 10;              // refinement check period
  int m_increment = 50;          // refinement batch size M
  int t_max = 50;                // max levels
  double rho = 0.1;              // CE elite fraction
  SmoothIndicatorKind kind = SmoothIndicatorKind::Logistic;
  std::uint64_t seed = 1;
  bool refine = false;
  int n_grad = 0;                // gradients per level; 0 means N

  void validate() const;  // throws std::invalid_argument on bad fields
};

struct LevelDiag {
  int level = 0;
  double s_check = 0.0;    // smoothing active at the stopping check (inf at level 0)
  double s_next = 0.0;     // adapted smoothing (NaN on the final level)
  double gamma = 0.0;      // CE threshold (NaN for other methods)
  int rank = 0;            // FIS rank selected at this level (0 if none)
  double weights_cv = 0.0; // cv of the fit weights (NaN on the final level)
  double cv_stop = 0.0;    // stopping statistic (NaN if undefined)
  double elapsed_s = 0.0;  // wall time; never serialized
  Eigen::VectorXd spectrum;  // eigenvalues of the level's H estimate (icered)
};

struct EstimationResult {
  double p_hat = 0.0;
  double cv_hat = 0.0;
  int n_levels = 0;
  long lsf_calls = 0;
  long grad_calls = 0;
  bool converged = false;
  std::vector<LevelDiag> per_level;
  Eigen::MatrixXd final_modes;  // first two eigenvectors of the final H estimate
};

/// Plain Monte Carlo over the standard Gaussian prior.
EstimationResult run_mc(const LimitStateProblem& problem, long n, NormalRng& rng);

/// Sample coefficient of variation (population normalization, divide by n).
/// Internally rescaled by the maximum so huge entries cannot overflow.
double weighted_cv(const Eigen::VectorXd& values);

struct SmoothingUpdate {
  double s = 0.0;
  bool degenerate = false;  // objective was flat; s is the fallback s_prev/2
};

/// Next smoothing parameter: minimizes (cv(f(g; s) w) - delta)^2 over
/// (0, s_prev) by golden section on ln s. Never evaluates the LSF.
SmoothingUpdate adapt_smoothing(const Eigen::VectorXd& g_values,
                                const Eigen::VectorXd& level_weights, double s_prev,
                                double delta, SmoothIndicatorKind kind);

/// Standard cross-entropy method with the full-dimensional Gaussian family
/// and elite rho-quantile thresholds.
EstimationResult run_ce(const LimitStateProblem& problem, const SolverConfig& config,
                        NormalRng& rng);

/// Improved cross-entropy: smooth indicator with adaptive smoothing, full
/// dimensional Gaussian fits, stop when cv(indicator/f) <= delta.
EstimationResult run_ice(const LimitStateProblem& problem, const SolverConfig& config,
                         NormalRng& rng);

/// Improved cross-entropy with failure-informed dimension reduction: per
/// level the gradient second-moment matrix is estimated, the FIS basis
/// rebuilt, previous reference parameters rotated into the new basis, and a
/// reduced Gaussian fitted on the FIS coordinates. Complement directions stay
/// at the standard Gaussian prior. Requires problem.gradient.
EstimationResult run_icered(const LimitStateProblem& problem, const SolverConfig& config,
                            NormalRng& rng);

/// Final-level state handed from run_icered to the refinement step.
/// phi_r empty means the final biasing is the full-dimensional prior
/// (termination at level 0).
struct RefineState {
  Eigen::VectorXd indicator_vals;  // 0/1 per retained sample
  Eigen::VectorXd weights;         // matching IS weights
  GaussianParams reduced;          // final reduced reference parameters
  Eigen::MatrixXd phi_r;           // d x r FIS basis of the final level
  int dim = 0;
};

/// Draws LSF-only batches from the final biasing until the running mean of
/// the last m_check cv values falls below delta_bar. No gradient calls.
EstimationResult refine_estimate(RefineState state, const LimitStateProblem& problem,
                                 const SolverConfig& config, NormalRng& rng);

}  // namespace rareis

#endif  // RAREIS_ESTIMATORS_HPP
