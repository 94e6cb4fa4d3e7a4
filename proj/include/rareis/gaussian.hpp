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

#ifndef RAREIS_GAUSSIAN_HPP
#define RAREIS_GAUSSIAN_HPP

#include <Eigen/Core>

#include "rareis/fis.hpp"
#include "rareis/rng.hpp"

namespace rareis {

/// Mean and covariance of a (possibly reduced-dimension) Gaussian biasing
/// density. cov must be symmetric PSD up to roundoff; factorizations add a
/// relative jitter before giving up (see chol_factor).
struct GaussianParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

/// Biasing density that is a general Gaussian on the local FIS coordinates
/// and the standard Gaussian prior on the local complement.
struct CompositeBiasing {
  GaussianParams reduced;        // dimension r
  int full_dim = 0;              // d
  const FisBasis* basis = nullptr;  // non-owning; only the split is needed here
};

/// Lower-triangular Cholesky factor of cov + jitter*I. Jitter policy:
/// 1e-10 * trace/k first (floored at 1e-300), one retry at 1e-6 * trace/k,
/// then DegenerateCovariance.
Eigen::MatrixXd chol_factor(const Eigen::MatrixXd& cov);

double gaussian_logpdf(const Eigen::VectorXd& x, const GaussianParams& params);

/// Log-density of every column of x (k x n) under params; shares the single
/// factorization across samples.
Eigen::VectorXd gaussian_logpdf_cols(const Eigen::MatrixXd& x, const GaussianParams& params);

/// n i.i.d. draws, one per row (n x k). Uses the Cholesky factor applied to
/// standard normals; deterministic given the rng state.
Eigen::MatrixXd sample_gaussian(const GaussianParams& params, int n, NormalRng& rng);

/// Weighted maximum-likelihood fit: mean = sum w_i x_i / W and the
/// W-normalized (biased MLE) covariance. Rows of samples are observations.
GaussianParams fit_gaussian_weighted(const Eigen::MatrixXd& samples,
                                     const Eigen::VectorXd& weights);

/// log pi(theta_tilde) for theta_tilde = [theta_r, theta_perp]: reduced
/// Gaussian on the first r coordinates plus standard normal on the rest.
double composite_logpdf(const Eigen::VectorXd& theta_tilde, const CompositeBiasing& biasing);

/// Re-expresses reduced reference parameters fitted in basis_old in the
/// coordinate system of basis_new. The returned full-dimension Gaussian
/// describes the same full-space density: block mean [Phi_new^T m] and
/// covariance B_new^T (Phi_r_old S_r Phi_r_old^T + Phi_perp_old Phi_perp_old^T) B_new.
GaussianParams adjust_reference_params(const GaussianParams& reduced,
                                       const FisBasis& basis_old,
                                       const FisBasis& basis_new);

}  // namespace rareis

#endif  // RAREIS_GAUSSIAN_HPP
