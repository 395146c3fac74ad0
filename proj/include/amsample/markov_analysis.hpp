// Copyright 2026 The amsample Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AMSAMPLE_MARKOV_ANALYSIS_HPP
#define AMSAMPLE_MARKOV_ANALYSIS_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "amsample/core.hpp"
#include "amsample/rng.hpp"
#include "amsample/score_models.hpp"

namespace amsample {

/// Linear map of the stacked state z = (x_t, x_{t-1}) for heavy-ball
/// iterations on a quadratic:
///
///   T = [ (1 + beta) I - alpha (1 - beta) A   -beta I ]
///       [ I                                    0       ]
struct TransitionMatrix {
  Matrix T;
  double alpha = 0.0;
  double beta = 0.0;
  Matrix A;

  Eigen::Index dim() const { return A.rows(); }
};

/// Q diag(lambda) Q^T with Q Haar-distributed and lambda log-uniform on
/// [lo, hi]; the extreme eigenvalues are pinned to lo and hi when d >= 2.
Matrix random_spd(Eigen::Index d, double lo, double hi, RngStream& rng);

TransitionMatrix build_transition(const Matrix& A, double alpha, double beta);

/// Eigenvalues of T from the eigenvalues a of A: each a contributes the two
/// roots of lambda^2 - ((1 + beta) - alpha (1 - beta) a) lambda + beta = 0.
std::vector<std::complex<double>> transition_eigenvalues(const TransitionMatrix& T);

/// max |lambda| over transition_eigenvalues. Near-double roots (discriminant
/// within rounding of zero) resolve to the exact double root.
double spectral_radius(const TransitionMatrix& T);

/// Spectral radius via a general dense eigen-solver. Loses ~sqrt(eps)
/// accuracy at defective eigenvalues; used as an independent cross-check.
double spectral_radius_dense(const Matrix& T);

/// (1 - alpha mu) / (1 + alpha mu); requires 0 < alpha mu < 1.
double rate_bound(double alpha, double mu);

/// Momentum that places the mu-eigenvalue pair on a double root:
/// rate_bound(alpha, mu)^2.
double tuned_beta(double alpha, double mu);

/// Noise covariance of the stacked chain when the x-block receives
/// sqrt(2 alpha) N(0, I): diag(2 alpha I, 0).
Matrix sampler_noise_covariance(Eigen::Index d, double alpha);

/// Solves Sigma = T Sigma T^T + Q. Dense Kronecker solve up to 40 x 40,
/// squaring (doubling) iteration beyond.
Matrix solve_discrete_lyapunov(const Matrix& T, const Matrix& Q);

/// Relative residual |Sigma - T Sigma T^T - Q|_F / |Q|_F (absolute if Q = 0).
double lyapunov_residual(const Matrix& T, const Matrix& sigma, const Matrix& Q);

/// Stationary covariance of z_{t+1} = T z_t + noise(Q). Rejects rho(T) >= 1.
Matrix stationary_covariance(const TransitionMatrix& T, const Matrix& Q);

/// Empirical covariance of the stacked state of the quadratic chain
/// z_{t+1} = T z_t + c + (sqrt(2 alpha) xi, 0), after `burn_in` steps.
Matrix simulate_stacked_covariance(const TransitionMatrix& T, const Vector& b,
                                   std::int64_t steps, std::int64_t burn_in,
                                   RngStream& rng);

/// Runs two copies of the quadratic chain (b = 0) from `init_a` and `init_b`
/// with every noise draw shared, and returns |z_a^t - z_b^t| for
/// t = 0..steps.
std::vector<double> contraction_estimate(const Matrix& A, double alpha, double beta,
                                         const Vector& init_a, const Vector& init_b,
                                         std::int64_t steps, RngStream& rng);

/// Least-squares slope of log(values[t]) against t over [first, last].
/// Zero entries are skipped.
double log_slope(const std::vector<double>& values, std::size_t first,
                 std::size_t last);

// --- Noisy heavy-ball chains on general potentials -------------------------

enum class BetaMode { Adaptive, Fixed };

/// How noise enters the heavy-ball chain.
enum class ChainNoise {
  Langevin,  ///< x-update receives sqrt(2 alpha) xi
  Gradient,  ///< gradient oracle returns grad f + scale * xi
};

/// x_{t+1} = x_t - alpha (1 - beta_t) g_t + beta_t (x_t - x_{t-1}) [+ noise]
/// where g_t is the (possibly noisy) gradient.
struct ChainSpec {
  double alpha = 0.1;
  BetaMode beta_mode = BetaMode::Fixed;
  double beta = 0.0;   ///< used when beta_mode == Fixed
  double delta = 0.1;  ///< projection threshold when beta_mode == Adaptive
  ChainNoise noise = ChainNoise::Gradient;
  double noise_scale = 1.0;
};

struct BiasPoint {
  double alpha = 0.0;
  Vector bias;            ///< time-averaged x minus x*
  Vector standard_error;  ///< batch-means standard error per coordinate
  double bias_norm = 0.0;
  bool diverged = false;
};

struct BiasScalingResult {
  double slope = 0.0;      ///< d log |bias| / d log alpha
  double intercept = 0.0;  ///< log |bias| at alpha = 1 on the fitted line
  std::vector<BiasPoint> points;
};

struct BiasScalingOptions {
  std::vector<double> alphas;
  BetaMode beta_mode = BetaMode::Adaptive;
  double beta = 0.0;
  double delta = 0.1;
  double gradient_noise = 1.0;
  std::int64_t chain_length = 1'000'000;
  std::int64_t burn_in = 10'000;
  int replicas = 8;
  int batches_per_replica = 10;
};

/// Stationary bias of the noisy heavy-ball chain versus step size.
/// Requires alpha L < 2 at every grid point and at least two points that do
/// not diverge (|x - x*| > 1e6 aborts a point).
BiasScalingResult bias_scaling_experiment(const Potential& potential,
                                          const BiasScalingOptions& options,
                                          RngStream& rng);

struct DecayOptions {
  double alpha = 0.1;
  double delta = 0.5;
  double gradient_noise = 1.0;
  std::int64_t chain_length = 2000;
  int replicas = 200;
  double init_offset = 3.0;  ///< chains start at x* + init_offset * (1, ..., 1)
};

struct DecayResult {
  double rate = 0.0;
  double floor = 0.0;
  double amplitude = 0.0;
  bool converged = false;
  std::vector<double> mean_squared_distance;  ///< t = 0..chain_length
};

/// Replica average of |x_t - x*|^2 for the adaptive-beta chain, fitted by
/// amplitude * rate^t + floor. Requires 2 alpha delta mu < 1.
DecayResult squared_distance_decay(const Potential& potential,
                                   const DecayOptions& options, RngStream& rng);

/// Fits y_t ~ amplitude * rate^t + floor by profiling the rate over (0, 1).
DecayResult fit_exponential_floor(const std::vector<double>& y);

}  // namespace amsample

#endif  // AMSAMPLE_MARKOV_ANALYSIS_HPP
