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

#include "rareis/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "rareis/errors.hpp"
#include "rareis/fis.hpp"
#include "rareis/normal.hpp"

namespace rareis {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kSmoothFloor = 1e-300;  // samples below contribute nothing

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// log N(x; 0, I) per row of a samples-in-rows matrix.
Eigen::VectorXd log_std_normal_rows(const Eigen::MatrixXd& samples) {
  const double c = -0.5 * static_cast<double>(samples.cols()) * kLog2Pi;
  return (-0.5 * samples.rowwise().squaredNorm().array() + c).matrix();
}

// Self-normalized IS estimate of p and its cv:
// Vhat = (1/(N-1)) [ (1/N) sum d_i w_i^2 - p^2 ].
std::pair<double, double> is_estimate(const Eigen::VectorXd& ind, const Eigen::VectorXd& w) {
  const auto n = ind.size();
  const double p = ind.cwiseProduct(w).sum() / static_cast<double>(n);
  if (!(p > 0.0)) return {0.0, kInf};
  const double second = ind.cwiseProduct(w.cwiseAbs2()).sum() / static_cast<double>(n);
  const double var = std::max(0.0, (second - p * p) / static_cast<double>(n - 1));
  return {p, std::sqrt(var) / p};
}

// Lower empirical quantile: 1-based ascending order statistic at ceil(n * q).
double order_statistic(Eigen::VectorXd values, double q) {
  const auto n = values.size();
  auto idx = static_cast<Eigen::Index>(std::ceil(q * static_cast<double>(n)));
  idx = std::clamp<Eigen::Index>(idx, 1, n);
  std::nth_element(values.data(), values.data() + (idx - 1), values.data() + n);
  return values(idx - 1);
}

struct SmoothObjective {
  const Eigen::VectorXd& g;
  const Eigen::VectorXd& log_w;
  SmoothIndicatorKind kind;

  // cv of f(g; s) * w, evaluated with a log-domain shift so extreme weights
  // cannot overflow; cv itself is scale invariant.
  double cv_at(double s) const {
    const auto n = g.size();
    Eigen::VectorXd log_vals(n);
    double shift = -kInf;
    for (Eigen::Index i = 0; i < n; ++i) {
      log_vals(i) = log_smooth_indicator(g(i), s, kind) + log_w(i);
      shift = std::max(shift, log_vals(i));
    }
    if (!std::isfinite(shift)) return kNan;
    Eigen::VectorXd vals = (log_vals.array() - shift).exp();
    const double mean = vals.mean();
    const double var = (vals.array() - mean).square().sum() / static_cast<double>(n);
    return std::sqrt(var) / mean;
  }
};

SmoothingUpdate adapt_smoothing_log(const Eigen::VectorXd& g_values,
                                    const Eigen::VectorXd& log_weights, double s_prev,
                                    double delta, SmoothIndicatorKind kind) {
  const auto n = g_values.size();
  if (log_weights.size() != n)
    throw DimensionMismatch("adapt_smoothing: weight count mismatch");
  if (!g_values.allFinite()) throw InvalidLsfValue("adapt_smoothing: non-finite LSF values");
  if (!(s_prev > 0.0)) throw InvalidSmoothing("adapt_smoothing: s_prev must be positive");

  const double g_abs_max = g_values.cwiseAbs().maxCoeff();
  double s_ub = std::isinf(s_prev) ? 10.0 * g_abs_max : s_prev;
  if (!(s_ub > 0.0)) s_ub = 1.0;

  // s_min from the spread of |g|; fall back to a tiny multiple of the scale
  // when the interquartile range degenerates.
  Eigen::VectorXd abs_g = g_values.cwiseAbs();
  std::sort(abs_g.data(), abs_g.data() + n);
  const auto q1 = static_cast<Eigen::Index>(std::ceil(0.25 * static_cast<double>(n))) - 1;
  const auto q3 = static_cast<Eigen::Index>(std::ceil(0.75 * static_cast<double>(n))) - 1;
  double s_min = 1e-8 * (abs_g(std::max<Eigen::Index>(q3, 0)) - abs_g(std::max<Eigen::Index>(q1, 0)));
  if (!(s_min > 0.0)) s_min = 1e-12 * std::max(1.0, g_abs_max);
  if (s_min >= s_ub) s_min = 0.5 * s_ub;

  const SmoothObjective objective{g_values, log_weights, kind};
  const double fallback = std::isinf(s_prev) ? 0.5 * s_ub : 0.5 * s_prev;

  // Flat objective (e.g., every sample deep in failure): nothing to adapt.
  double probe_min = kInf, probe_max = -kInf;
  for (int i = 0; i < 5; ++i) {
    const double t = std::log(s_min) + (std::log(s_ub) - std::log(s_min)) * i / 4.0;
    const double c = objective.cv_at(std::exp(t));
    if (std::isnan(c)) return {fallback, true};
    probe_min = std::min(probe_min, c);
    probe_max = std::max(probe_max, c);
  }
  if (probe_max - probe_min <= 1e-10 * std::max(1.0, probe_max)) return {fallback, true};

  // Golden section on ln s over [ln s_min, ln s_ub].
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(s_min), b = std::log(s_ub);
  double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
  auto phi = [&](double t) {
    const double diff = objective.cv_at(std::exp(t)) - delta;
    return diff * diff;
  };
  double f1 = phi(c1), f2 = phi(c2);
  for (int it = 0; it < 200 && (b - a) > 1e-6; ++it) {
    if (f1 <= f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - gr * (b - a);
      f1 = phi(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + gr * (b - a);
      f2 = phi(c2);
    }
  }
  return {std::exp(0.5 * (a + b)), false};
}

// Stopping statistic cv(indicator / f) with the representability floor on f.
// Returns +inf when it cannot be computed (no failing sample, or every f
// below the floor, in which case s is halved and the level is non-informative).
double stopping_cv(const Eigen::VectorXd& g, const Eigen::VectorXd& ind, double& s,
                   SmoothIndicatorKind kind) {
  const auto n = g.size();
  std::vector<double> ratios;
  ratios.reserve(n);
  int included = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = smooth_indicator(g(i), s, kind);
    if (f < kSmoothFloor) continue;
    ++included;
    ratios.push_back(ind(i) > 0.0 ? std::exp(-log_smooth_indicator(g(i), s, kind)) : 0.0);
  }
  if (included == 0) {
    s *= 0.5;
    return kInf;
  }
  Eigen::VectorXd r = Eigen::Map<Eigen::VectorXd>(ratios.data(), included);
  if (!(r.maxCoeff() > 0.0)) return kInf;
  return weighted_cv(r);
}

struct LevelBasis {
  Eigen::VectorXd eigvals;  // length d
  int rank = 0;
  Eigen::MatrixXd phi_r;  // d x rank
  Eigen::MatrixXd modes;  // d x (up to 2), leading eigenvectors
};

// Dense route when d <= N (the second-moment matrix is cheap to form);
// Gram dual otherwise. Both yield the same spectrum and leading subspace.
LevelBasis compute_level_basis(const Eigen::MatrixXd& grads, const Eigen::VectorXd& weights,
                               double eps, int max_rank) {
  const auto n = grads.rows();
  const auto d = grads.cols();
  LevelBasis out;
  if (d <= n) {
    const Eigen::MatrixXd h = estimate_grad_second_moment(grads, weights);
    const FisBasis basis = compute_fis_basis(h, eps, max_rank);
    out.eigvals = basis.eigvals;
    out.rank = basis.rank;
    out.phi_r = basis.phi_r;
    out.modes = Eigen::MatrixXd(d, std::min<Eigen::Index>(2, d));
    out.modes.col(0) = basis.phi_r.col(0);
    if (out.modes.cols() > 1)
      out.modes.col(1) = basis.rank >= 2 ? basis.phi_r.col(1) : basis.phi_perp.col(0);
  } else {
    const LeadingBasis lead = compute_leading_basis(grads, weights, eps, max_rank, 2);
    out.eigvals = lead.eigvals;
    out.rank = lead.rank;
    out.phi_r = lead.vectors.leftCols(lead.rank);
    out.modes = lead.vectors.leftCols(std::min<Eigen::Index>(2, lead.vectors.cols()));
  }
  return out;
}

// Full-space log-density of the previous level's composite biasing, used for
// the corrected fit weights. The covariance is I + Phi (S - I) Phi^T, so the
// density is evaluated with the matrix-inversion identity in O(d r) per
// sample and never materializes a d x d matrix. Coordinate-free: equals the
// density of the basis-rotated parameters at the rotated point.
struct CompositeFullLogPdf {
  Eigen::VectorXd mean_global;  // Phi mu_r
  Eigen::MatrixXd phi;          // d x r
  Eigen::MatrixXd sigma_chol;   // Cholesky factor of S_r
  double log_det_sigma = 0.0;
  int dim = 0;

  CompositeFullLogPdf(const GaussianParams& reduced, const Eigen::MatrixXd& phi_in, int d)
      : mean_global(phi_in * reduced.mean), phi(phi_in), dim(d) {
    sigma_chol = chol_factor(reduced.cov);
    for (Eigen::Index i = 0; i < sigma_chol.rows(); ++i)
      log_det_sigma += 2.0 * std::log(sigma_chol(i, i));
  }

  double operator()(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd x = theta - mean_global;
    const Eigen::VectorXd y = phi.transpose() * x;
    Eigen::VectorXd z = y;
    sigma_chol.triangularView<Eigen::Lower>().solveInPlace(z);
    const double quad = x.squaredNorm() - y.squaredNorm() + z.squaredNorm();
    return -0.5 * static_cast<double>(dim) * kLog2Pi - 0.5 * log_det_sigma - 0.5 * quad;
  }
};

}  // namespace

void SolverConfig::validate() const {
  if (n_per_level < 2) throw std::invalid_argument("solver: n_per_level must be >= 2");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("solver: rho must be in (0, 1)");
  if (!(delta > 0.0)) throw std::invalid_argument("solver: delta must be > 0");
  if (eps < 0.0) throw std::invalid_argument("solver: eps must be >= 0");
  if (!(delta_bar > 0.0)) throw std::invalid_argument("solver: delta_bar must be > 0");
  if (t_max < 1) throw std::invalid_argument("solver: t_max must be >= 1");
  if (m_check < 1) throw std::invalid_argument("solver: m_check must be >= 1");
  if (m_increment < 1) throw std::invalid_argument("solver: m_increment must be >= 1");
  if (n_grad < 0 || n_grad > n_per_level)
    throw std::invalid_argument("solver: n_grad must be in [0, n_per_level]");
}

EstimationResult run_mc(const LimitStateProblem& problem, long n, NormalRng& rng) {
  if (n < 1) throw std::invalid_argument("run_mc: n must be >= 1");
  long hits = 0;
  Eigen::VectorXd theta(problem.dim);
  for (long i = 0; i < n; ++i) {
    rng.fill_normal(theta);
    hits += indicator(problem.evaluate(theta));
  }
  EstimationResult result;
  result.p_hat = static_cast<double>(hits) / static_cast<double>(n);
  result.cv_hat = result.p_hat > 0.0
                      ? std::sqrt((1.0 - result.p_hat) / (static_cast<double>(n) * result.p_hat))
                      : kInf;
  result.n_levels = 1;
  result.lsf_calls = n;
  result.converged = true;
  return result;
}

double weighted_cv(const Eigen::VectorXd& values) {
  const auto n = values.size();
  if (n == 0) throw std::invalid_argument("weighted_cv: empty input");
  if ((values.array() < 0.0).any())
    throw std::invalid_argument("weighted_cv: negative entries");
  const double vmax = values.maxCoeff();
  if (!(vmax > 0.0)) throw AllWeightsZero("weighted_cv: all entries zero");
  const Eigen::ArrayXd scaled = values.array() / vmax;
  const double mean = scaled.mean();
  const double var = (scaled - mean).square().sum() / static_cast<double>(n);
  return std::sqrt(var) / mean;
}

SmoothingUpdate adapt_smoothing(const Eigen::VectorXd& g_values,
                                const Eigen::VectorXd& level_weights, double s_prev,
                                double delta, SmoothIndicatorKind kind) {
  return adapt_smoothing_log(g_values, level_weights.array().log().matrix(), s_prev, delta,
                             kind);
}

EstimationResult run_ce(const LimitStateProblem& problem, const SolverConfig& config,
                        NormalRng& rng) {
  config.validate();
  const int d = problem.dim;
  const int n = config.n_per_level;
  GaussianParams biasing{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d)};

  EstimationResult result;
  Eigen::MatrixXd theta(n, d);
  Eigen::VectorXd z(d), g(n), ind(n);

  for (int level = 0; level < config.t_max; ++level) {
    const double t0 = now_seconds();
    Eigen::VectorXd log_w = Eigen::VectorXd::Zero(n);
    if (level == 0) {
      for (int i = 0; i < n; ++i) {
        rng.fill_normal(z);
        theta.row(i) = z.transpose();
      }
    } else {
      theta = sample_gaussian(biasing, n, rng);
      log_w = log_std_normal_rows(theta) -
              gaussian_logpdf_cols(theta.transpose(), biasing);
    }
    for (int i = 0; i < n; ++i) {
      g(i) = problem.evaluate(theta.row(i).transpose());
      ind(i) = indicator(g(i));
    }
    result.lsf_calls += n;
    result.n_levels = level + 1;

    const double gamma = order_statistic(g, config.rho);
    auto [p, cv] = is_estimate(ind, log_w.array().exp().matrix());
    result.p_hat = p;
    result.cv_hat = cv;

    LevelDiag diag;
    diag.level = level;
    diag.s_check = kNan;
    diag.s_next = kNan;
    diag.gamma = gamma;
    diag.weights_cv = kNan;
    diag.cv_stop = kNan;

    if (gamma <= 0.0) {
      result.converged = true;
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;
    }
    if (level == config.t_max - 1) {
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;  // level budget exhausted
    }

    // Elite-weighted fit; the CE objective is weight-scale invariant, so the
    // log weights are shifted by their elite maximum before exponentiation.
    double shift = -kInf;
    for (int i = 0; i < n; ++i)
      if (g(i) <= gamma) shift = std::max(shift, log_w(i));
    Eigen::VectorXd fit_w = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
      if (g(i) <= gamma) fit_w(i) = std::exp(log_w(i) - shift);
    if (!(fit_w.sum() > 0.0)) {
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;  // weights degenerated; non-converged
    }
    diag.weights_cv = weighted_cv(fit_w);
    try {
      biasing = fit_gaussian_weighted(theta, fit_w);
    } catch (const DegenerateCovariance&) {
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;
    }
    diag.elapsed_s = now_seconds() - t0;
    result.per_level.push_back(std::move(diag));
  }
  return result;
}

EstimationResult run_ice(const LimitStateProblem& problem, const SolverConfig& config,
                         NormalRng& rng) {
  config.validate();
  const int d = problem.dim;
  const int n = config.n_per_level;
  GaussianParams biasing{Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d)};
  double s = kInf;

  EstimationResult result;
  Eigen::MatrixXd theta(n, d);
  Eigen::VectorXd z(d), g(n), ind(n);

  for (int level = 0; level < config.t_max; ++level) {
    const double t0 = now_seconds();
    Eigen::VectorXd log_w = Eigen::VectorXd::Zero(n);
    if (level == 0) {
      for (int i = 0; i < n; ++i) {
        rng.fill_normal(z);
        theta.row(i) = z.transpose();
      }
    } else {
      theta = sample_gaussian(biasing, n, rng);
      log_w = log_std_normal_rows(theta) -
              gaussian_logpdf_cols(theta.transpose(), biasing);
    }
    for (int i = 0; i < n; ++i) {
      g(i) = problem.evaluate(theta.row(i).transpose());
      ind(i) = indicator(g(i));
    }
    result.lsf_calls += n;
    result.n_levels = level + 1;

    LevelDiag diag;
    diag.level = level;
    diag.s_check = s;
    diag.s_next = kNan;
    diag.gamma = kNan;
    diag.weights_cv = kNan;
    const double cv_stop = stopping_cv(g, ind, s, config.kind);
    diag.cv_stop = std::isfinite(cv_stop) ? cv_stop : kNan;

    auto [p, cv] = is_estimate(ind, log_w.array().exp().matrix());
    result.p_hat = p;
    result.cv_hat = cv;

    if (cv_stop <= config.delta) {
      result.converged = true;
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;
    }
    if (level == config.t_max - 1) {
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;
    }

    const SmoothingUpdate update = adapt_smoothing_log(g, log_w, s, config.delta, config.kind);
    diag.s_next = update.s;

    Eigen::VectorXd log_fit(n);
    double shift = -kInf;
    for (int i = 0; i < n; ++i) {
      log_fit(i) = log_w(i) + log_smooth_indicator(g(i), update.s, config.kind);
      shift = std::max(shift, log_fit(i));
    }
    if (!std::isfinite(shift)) {
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;  // every smooth-indicator weight underflowed
    }
    const Eigen::VectorXd fit_w = (log_fit.array() - shift).exp();
    diag.weights_cv = weighted_cv(fit_w);
    try {
      biasing = fit_gaussian_weighted(theta, fit_w);
    } catch (const DegenerateCovariance&) {
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;
    }
    s = update.s;
    diag.elapsed_s = now_seconds() - t0;
    result.per_level.push_back(std::move(diag));
  }
  return result;
}

EstimationResult run_icered(const LimitStateProblem& problem, const SolverConfig& config,
                            NormalRng& rng) {
  config.validate();
  if (!problem.gradient) throw MissingGradient("run_icered: problem exposes no gradient");
  const int d = problem.dim;
  const int n = config.n_per_level;
  const int n_grad = config.n_grad == 0 ? n : config.n_grad;

  Eigen::MatrixXd phi_gen;     // d x r basis that generates the current level
  GaussianParams red_params;   // reduced reference parameters on phi_gen
  double s = kInf;

  EstimationResult result;
  Eigen::MatrixXd theta(d, n);
  Eigen::VectorXd g(n), ind(n), log_w(n);
  Eigen::VectorXd w_raw;  // level IS weights in the linear domain

  for (int level = 0; level < config.t_max; ++level) {
    const double t0 = now_seconds();
    if (level == 0) {
      rng.fill_normal(theta);
      log_w.setZero();
    } else {
      const int r = red_params.dim();
      const Eigen::MatrixXd local_r = sample_gaussian(red_params, n, rng);  // n x r
      theta = phi_gen * local_r.transpose();
      if (r < d) {
        // Complement draw: project a fresh standard normal onto the CS.
        Eigen::MatrixXd zeta(d, n);
        rng.fill_normal(zeta);
        theta += zeta - phi_gen * (phi_gen.transpose() * zeta);
      }
      // Complement factors cancel exactly; only the reduced ratio survives.
      log_w = log_std_normal_rows(local_r) -
              gaussian_logpdf_cols(local_r.transpose(), red_params);
    }
    for (int i = 0; i < n; ++i) {
      g(i) = problem.evaluate(theta.col(i));
      ind(i) = indicator(g(i));
    }
    result.lsf_calls += n;
    result.n_levels = level + 1;
    w_raw = log_w.array().exp();

    LevelDiag diag;
    diag.level = level;
    diag.s_check = s;
    diag.s_next = kNan;
    diag.gamma = kNan;
    diag.weights_cv = kNan;
    const double cv_stop = stopping_cv(g, ind, s, config.kind);
    diag.cv_stop = std::isfinite(cv_stop) ? cv_stop : kNan;

    auto [p, cv] = is_estimate(ind, w_raw);
    result.p_hat = p;
    result.cv_hat = cv;

    if (cv_stop <= config.delta) {
      result.converged = true;
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;
    }
    if (level == config.t_max - 1) {
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;
    }

    const SmoothingUpdate update = adapt_smoothing_log(g, log_w, s, config.delta, config.kind);
    diag.s_next = update.s;

    Eigen::VectorXd log_f(n);
    for (int i = 0; i < n; ++i)
      log_f(i) = log_smooth_indicator(g(i), update.s, config.kind);

    // The basis and parameters that generated this level; needed below for
    // the corrected weights after phi_gen is replaced.
    const Eigen::MatrixXd phi_prev = phi_gen;
    const GaussianParams red_prev = red_params;

    // Weights for the second-moment estimate (self-normalized, shift-safe).
    Eigen::VectorXd log_h = log_w + log_f;
    const double shift_h = log_h.head(n_grad).maxCoeff();
    bool basis_ok = std::isfinite(shift_h);

    if (basis_ok) {
      Eigen::VectorXd h_w = (log_h.head(n_grad).array() - shift_h).exp();
      Eigen::MatrixXd grads(n_grad, d);
      for (int i = 0; i < n_grad; ++i) {
        const double coeff = dlog_smooth_indicator_dg(g(i), update.s, config.kind);
        grads.row(i) = coeff * problem.gradient(theta.col(i)).transpose();
      }
      result.grad_calls += n_grad;
      const int max_rank = std::max(1, std::min(d, n_grad - 1));
      try {
        const LevelBasis basis = compute_level_basis(grads, h_w, config.eps, max_rank);
        phi_gen = basis.phi_r;
        diag.rank = basis.rank;
        diag.spectrum = basis.eigvals;
        result.final_modes = basis.modes;
      } catch (const AllWeightsZero&) {
        basis_ok = false;
      }
    }
    if (!basis_ok && phi_gen.cols() == 0) {
      // No usable basis yet and the smooth-indicator weights all underflowed.
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;
    }
    // On weight underflow the previous level's basis is reused (diag.rank
    // stays 0 to mark the reuse).

    // Corrected fit weights: smooth indicator times prior/previous-biasing
    // ratio, evaluated in the full space so the value is basis independent.
    Eigen::VectorXd log_fit(n);
    if (level == 0) {
      log_fit = log_f;
    } else {
      const CompositeFullLogPdf prev_logpdf(red_prev, phi_prev, d);
      for (int i = 0; i < n; ++i) {
        const double lp = -0.5 * static_cast<double>(d) * kLog2Pi -
                          0.5 * theta.col(i).squaredNorm();
        log_fit(i) = log_f(i) + lp - prev_logpdf(theta.col(i));
      }
    }
    const double shift_fit = log_fit.maxCoeff();
    if (!std::isfinite(shift_fit)) {
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;
    }
    const Eigen::VectorXd fit_w = (log_fit.array() - shift_fit).exp();
    diag.weights_cv = weighted_cv(fit_w);

    const Eigen::MatrixXd local_fit = (phi_gen.transpose() * theta).transpose();  // n x r
    try {
      red_params = fit_gaussian_weighted(local_fit, fit_w);
    } catch (const DegenerateCovariance&) {
      diag.elapsed_s = now_seconds() - t0;
      result.per_level.push_back(std::move(diag));
      break;
    }
    s = update.s;
    diag.elapsed_s = now_seconds() - t0;
    result.per_level.push_back(std::move(diag));
  }

  if (config.refine) {
    RefineState state;
    state.indicator_vals = ind;
    state.weights = w_raw;
    state.reduced = red_params;
    state.phi_r = phi_gen;
    state.dim = d;
    const EstimationResult refined = refine_estimate(std::move(state), problem, config, rng);
    result.p_hat = refined.p_hat;
    result.cv_hat = refined.cv_hat;
    result.lsf_calls += refined.lsf_calls;
    result.converged = result.converged && refined.converged;
  }
  return result;
}

EstimationResult refine_estimate(RefineState state, const LimitStateProblem& problem,
                                 const SolverConfig& config, NormalRng& rng) {
  config.validate();
  const int d = state.dim;
  const int m = config.m_check;
  const int batch = config.m_increment;
  const bool from_prior = state.phi_r.cols() == 0;
  const int r = from_prior ? d : static_cast<int>(state.phi_r.cols());

  std::vector<double> ind_vals(state.indicator_vals.data(),
                               state.indicator_vals.data() + state.indicator_vals.size());
  std::vector<double> weights(state.weights.data(),
                              state.weights.data() + state.weights.size());
  std::vector<double> cv_history;

  EstimationResult result;
  result.converged = false;

  for (long k = 1;; ++k) {
    const auto n = static_cast<Eigen::Index>(ind_vals.size());
    const Eigen::Map<const Eigen::VectorXd> ind(ind_vals.data(), n);
    const Eigen::Map<const Eigen::VectorXd> w(weights.data(), n);
    auto [p, cv] = is_estimate(ind, w);
    result.p_hat = p;
    result.cv_hat = cv;
    cv_history.push_back(cv);

    if (k == 1 || k % m == 0) {
      const auto window = std::min<std::size_t>(m, cv_history.size());
      double mean_cv = 0.0;
      for (std::size_t i = cv_history.size() - window; i < cv_history.size(); ++i)
        mean_cv += cv_history[i];
      mean_cv /= static_cast<double>(window);
      if (mean_cv <= config.delta_bar) {
        result.converged = true;
        break;
      }
    }
    if (p == 0.0 && k > 100L * m) break;  // persistently empty estimate; abort flagged

    // LSF-only batch from the final biasing.
    Eigen::MatrixXd theta(d, batch);
    Eigen::VectorXd w_extra = Eigen::VectorXd::Ones(batch);
    if (from_prior) {
      rng.fill_normal(theta);
    } else {
      const Eigen::MatrixXd local_r = sample_gaussian(state.reduced, batch, rng);
      theta = state.phi_r * local_r.transpose();
      if (r < d) {
        Eigen::MatrixXd zeta(d, batch);
        rng.fill_normal(zeta);
        theta += zeta - state.phi_r * (state.phi_r.transpose() * zeta);
      }
      w_extra = (log_std_normal_rows(local_r) -
                 gaussian_logpdf_cols(local_r.transpose(), state.reduced))
                    .array()
                    .exp();
    }
    for (int i = 0; i < batch; ++i) {
      const double gval = problem.evaluate(theta.col(i));
      ind_vals.push_back(indicator(gval));
      weights.push_back(w_extra(i));
    }
    result.lsf_calls += batch;
  }
  return result;
}

}  // namespace rareis
