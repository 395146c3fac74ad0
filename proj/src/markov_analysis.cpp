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

#include "amsample/markov_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "amsample/samplers.hpp"

namespace amsample {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_spd(const Matrix& A) {
  require(A.rows() == A.cols() && A.rows() >= 1, "A: must be square");
  require((A - A.transpose()).cwiseAbs().maxCoeff() <=
              1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()),
          "A: must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
  require(eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0,
          "A: must be positive definite");
}

void gradient_into(const QuadraticPotential& f, const Vector& x, Vector& out) {
  out.noalias() = f.A() * x;
  out += f.b();
}

void gradient_into(const NonQuadraticPotential& f, const Vector& x, Vector& out) {
  out = f.kappa() * x + (x - f.shift()).array().tanh().matrix();
}

// Heavy-ball chain with allocation-free updates; one instance per replica.
template <class P>
class HeavyBallChain {
 public:
  HeavyBallChain(const P& f, const ChainSpec& spec, const Vector& x0)
      : f_(f), spec_(spec), x_(x0), x_prev_(x0), g_(x0.size()),
        g_prev_(Vector::Zero(x0.size())), noise_(x0.size()), next_(x0.size()) {}

  void step(RngStream& rng) {
    gradient_into(f_, x_, g_);
    if (spec_.noise == ChainNoise::Gradient && spec_.noise_scale != 0.0) {
      rng.normal(noise_);
      g_ += spec_.noise_scale * noise_;
    }
    if (spec_.beta_mode == BetaMode::Fixed) {
      beta_ = spec_.beta;
    } else {
      beta_ = beta_update(spec_.alpha, x_, x_prev_, g_, g_prev_, spec_.delta, t_, beta_);
    }
    next_ = (1.0 + beta_) * x_ - (spec_.alpha * (1.0 - beta_)) * g_ - beta_ * x_prev_;
    if (spec_.noise == ChainNoise::Langevin) {
      rng.normal(noise_);
      next_ += std::sqrt(2.0 * spec_.alpha) * noise_;
    }
    x_prev_.swap(x_);
    x_.swap(next_);
    g_prev_.swap(g_);
    ++t_;
  }

  const Vector& x() const { return x_; }
  double beta() const { return beta_; }

 private:
  const P& f_;
  ChainSpec spec_;
  Vector x_, x_prev_, g_, g_prev_, noise_, next_;
  double beta_ = 0.0;
  std::int64_t t_ = 0;
};

struct PointEstimate {
  Vector mean;
  Vector standard_error;
  bool diverged = false;
};

template <class P>
PointEstimate estimate_mean(const P& f, const ChainSpec& spec,
                            const BiasScalingOptions& options, const Vector& x_star,
                            RngStream& rng, std::uint64_t point_index) {
  const Eigen::Index d = x_star.size();
  const int batches = options.batches_per_replica;
  const std::int64_t batch_len = options.chain_length / batches;
  require(batch_len >= 1, "chain_length: shorter than the number of batches");
  std::vector<Vector> batch_means;
  batch_means.reserve(static_cast<std::size_t>(options.replicas * batches));
  for (int r = 0; r < options.replicas; ++r) {
    RngStream stream = rng.split(point_index).split(static_cast<std::uint64_t>(r));
    HeavyBallChain<P> chain(f, spec, x_star);
    for (std::int64_t t = 0; t < options.burn_in; ++t) chain.step(stream);
    for (int b = 0; b < batches; ++b) {
      Vector acc = Vector::Zero(d);
      for (std::int64_t t = 0; t < batch_len; ++t) {
        chain.step(stream);
        acc += chain.x();
      }
      if (!acc.allFinite() || (chain.x() - x_star).norm() > 1e6) {
        return {Vector(), Vector(), true};
      }
      batch_means.push_back(acc / static_cast<double>(batch_len));
    }
  }
  const double nb = static_cast<double>(batch_means.size());
  Vector mean = Vector::Zero(d);
  for (const auto& m : batch_means) mean += m;
  mean /= nb;
  Vector var = Vector::Zero(d);
  for (const auto& m : batch_means) var += (m - mean).array().square().matrix();
  var /= (nb - 1.0);
  return {mean, (var / nb).cwiseSqrt(), false};
}

}  // namespace

Matrix random_spd(Eigen::Index d, double lo, double hi, RngStream& rng) {
  require(d >= 1, "random_spd: dimension must be >= 1");
  require(lo > 0.0 && hi >= lo, "random_spd: need 0 < lo <= hi");
  Matrix G(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ();
  // Sign fix on R's diagonal makes Q Haar rather than QR-convention biased.
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  Vector lambda(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    lambda(i) = std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
  }
  if (d >= 2) {
    lambda(0) = lo;
    lambda(1) = hi;
  }
  Matrix A = Q * lambda.asDiagonal() * Q.transpose();
  return (0.5 * (A + A.transpose())).eval();
}

TransitionMatrix build_transition(const Matrix& A, double alpha, double beta) {
  check_spd(A);
  require(alpha >= 0.0, "alpha: must be >= 0");
  require(beta >= 0.0 && beta < 1.0, "beta: must lie in [0, 1)");
  const Eigen::Index d = A.rows();
  TransitionMatrix out;
  out.T = Matrix::Zero(2 * d, 2 * d);
  out.T.topLeftCorner(d, d) =
      (1.0 + beta) * Matrix::Identity(d, d) - alpha * (1.0 - beta) * A;
  out.T.topRightCorner(d, d) = -beta * Matrix::Identity(d, d);
  out.T.bottomLeftCorner(d, d) = Matrix::Identity(d, d);
  out.alpha = alpha;
  out.beta = beta;
  out.A = A;
  return out;
}

std::vector<std::complex<double>> transition_eigenvalues(const TransitionMatrix& T) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(T.A, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("A: eigen-decomposition failed");
  const double beta = T.beta;
  std::vector<std::complex<double>> roots;
  roots.reserve(static_cast<std::size_t>(2 * T.dim()));
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double a = eig.eigenvalues()[i];
    const double b = (1.0 + beta) - T.alpha * (1.0 - beta) * a;
    const double disc = b * b - 4.0 * beta;
    // Forward error of disc: b carries the rounding of its O(1) terms, not
    // of its own (possibly cancelled) magnitude.
    const double b_scale = (1.0 + beta) + T.alpha * (1.0 - beta) * std::abs(a);
    const double tol = 8.0 * kEps * (std::abs(b) * b_scale + 4.0 * beta);
    if (std::abs(disc) <= tol) {
      roots.emplace_back(0.5 * b, 0.0);
      roots.emplace_back(0.5 * b, 0.0);
    } else if (disc > 0.0) {
      // Cancellation-free pair: the larger root directly, the smaller from
      // the product of roots (= beta).
      const double big = 0.5 * (b + std::copysign(std::sqrt(disc), b));
      roots.emplace_back(big, 0.0);
      roots.emplace_back(big != 0.0 ? beta / big : 0.0, 0.0);
    } else {
      const double im = 0.5 * std::sqrt(-disc);
      roots.emplace_back(0.5 * b, im);
      roots.emplace_back(0.5 * b, -im);
    }
  }
  return roots;
}

double spectral_radius(const TransitionMatrix& T) {
  double rho = 0.0;
  for (const auto& lambda : transition_eigenvalues(T)) rho = std::max(rho, std::abs(lambda));
  return rho;
}

double spectral_radius_dense(const Matrix& T) {
  Eigen::EigenSolver<Matrix> eig(T, false);
  if (eig.info() != Eigen::Success) throw NumericalError("T: eigen-decomposition failed");
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double rate_bound(double alpha, double mu) {
  require(alpha > 0.0 && mu > 0.0, "alpha, mu: must be > 0");
  require(alpha * mu < 1.0, "alpha: rate bound needs alpha * mu < 1");
  return (1.0 - alpha * mu) / (1.0 + alpha * mu);
}

double tuned_beta(double alpha, double mu) {
  const double q = rate_bound(alpha, mu);
  return q * q;
}

Matrix sampler_noise_covariance(Eigen::Index d, double alpha) {
  Matrix Q = Matrix::Zero(2 * d, 2 * d);
  Q.topLeftCorner(d, d).diagonal().setConstant(2.0 * alpha);
  return Q;
}

Matrix solve_discrete_lyapunov(const Matrix& T, const Matrix& Q) {
  require(T.rows() == T.cols(), "T: must be square");
  require(Q.rows() == T.rows() && Q.cols() == T.cols(), "Q: shape mismatch with T");
  const Eigen::Index n = T.rows();
  Matrix sigma;
  if (n <= 40) {
    const Eigen::Index nn = n * n;
    Matrix K = Matrix::Identity(nn, nn);
    for (Eigen::Index l = 0; l < n; ++l)
      for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index j = 0; j < n; ++j)
          for (Eigen::Index i = 0; i < n; ++i)
            K(i + n * j, k + n * l) -= T(i, k) * T(j, l);
    const Vector q = Eigen::Map<const Vector>(Q.data(), nn);
    const Vector s = K.partialPivLu().solve(q);
    sigma = Eigen::Map<const Matrix>(s.data(), n, n);
  } else {
    sigma = Q;
    Matrix power = T;
    for (int it = 0; it < 200; ++it) {
      const Matrix increment = power * sigma * power.transpose();
      sigma += increment;
      power = power * power;
      if (increment.norm() <= 1e-17 * sigma.norm() || power.norm() <= 1e-300) break;
    }
  }
  return 0.5 * (sigma + sigma.transpose());
}

double lyapunov_residual(const Matrix& T, const Matrix& sigma, const Matrix& Q) {
  const double r = (sigma - T * sigma * T.transpose() - Q).norm();
  const double q = Q.norm();
  return q > 0.0 ? r / q : r;
}

Matrix stationary_covariance(const TransitionMatrix& T, const Matrix& Q) {
  const double rho = spectral_radius(T);
  require(rho < 1.0, "T: spectral radius " + std::to_string(rho) +
                         " >= 1, no stationary distribution");
  return solve_discrete_lyapunov(T.T, Q);
}

Matrix simulate_stacked_covariance(const TransitionMatrix& T, const Vector& b,
                                   std::int64_t steps, std::int64_t burn_in,
                                   RngStream& rng) {
  require(steps >= 2, "steps: need at least 2 samples");
  const Eigen::Index d = T.dim();
  require(b.size() == d, "b: dimension mismatch");
  Vector shift = Vector::Zero(2 * d);
  shift.head(d) = -T.alpha * (1.0 - T.beta) * b;
  const double noise_scale = std::sqrt(2.0 * T.alpha);
  Vector z = Vector::Zero(2 * d), next(2 * d), xi(d);
  Vector sum = Vector::Zero(2 * d);
  Matrix outer = Matrix::Zero(2 * d, 2 * d);
  for (std::int64_t t = 0; t < burn_in + steps; ++t) {
    rng.normal(xi);
    next.noalias() = T.T * z;
    next += shift;
    next.head(d) += noise_scale * xi;
    z.swap(next);
    if (t >= burn_in) {
      sum += z;
      outer.noalias() += z * z.transpose();
    }
  }
  const double n = static_cast<double>(steps);
  const Vector mean = sum / n;
  return (outer - n * mean * mean.transpose()) / (n - 1.0);
}

std::vector<double> contraction_estimate(const Matrix& A, double alpha, double beta,
                                         const Vector& init_a, const Vector& init_b,
                                         std::int64_t steps, RngStream& rng) {
  const TransitionMatrix T = build_transition(A, alpha, beta);
  const Eigen::Index d = T.dim();
  require(init_a.size() == 2 * d && init_b.size() == 2 * d,
          "init: stacked states must have dimension 2d");
  require(spectral_radius(T) < 1.0, "T: spectral radius must be < 1");
  const double noise_scale = std::sqrt(2.0 * alpha);
  // Chain b is stored as its offset e = z_a - z_b from chain a. With shared
  // noise the offset evolves as e <- T e, which avoids the cancellation of
  // subtracting two O(1) states once they agree to machine precision.
  Vector za = init_a, e = init_a - init_b, next(2 * d), xi(d);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps + 1));
  out.push_back(e.norm());
  for (std::int64_t t = 0; t < steps; ++t) {
    rng.normal(xi);
    next.noalias() = T.T * za;
    next.head(d) += noise_scale * xi;
    za.swap(next);
    next.noalias() = T.T * e;
    e.swap(next);
    out.push_back(e.norm());
  }
  return out;
}

double log_slope(const std::vector<double>& values, std::size_t first, std::size_t last) {
  require(first < last && last < values.size(), "log_slope: invalid range");
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t t = first; t <= last; ++t) {
    if (!(values[t] > 0.0)) continue;
    const double x = static_cast<double>(t);
    const double y = std::log(values[t]);
    n += 1;
    st += x;
    sy += y;
    stt += x * x;
    sty += x * y;
  }
  require(n >= 2, "log_slope: fewer than two positive values");
  return (n * sty - st * sy) / (n * stt - st * st);
}

BiasScalingResult bias_scaling_experiment(const Potential& potential,
                                          const BiasScalingOptions& options,
                                          RngStream& rng) {
  require(options.alphas.size() >= 2, "alphas: slope needs at least two grid points");
  require(options.replicas >= 1, "replicas: must be >= 1");
  require(options.batches_per_replica >= 1, "batches_per_replica: must be >= 1");
  require(options.replicas * options.batches_per_replica >= 2,
          "replicas: need at least two batches for a standard error");
  const double L = potential_L(potential);
  for (double a : options.alphas) {
    require(a > 0.0 && a * L < 2.0, "alphas: every step must satisfy 0 < alpha L < 2");
  }
  const Vector x_star = potential_minimizer(potential);
  BiasScalingResult result;
  for (std::size_t i = 0; i < options.alphas.size(); ++i) {
    ChainSpec spec;
    spec.alpha = options.alphas[i];
    spec.beta_mode = options.beta_mode;
    spec.beta = options.beta;
    spec.delta = options.delta;
    spec.noise = ChainNoise::Gradient;
    spec.noise_scale = options.gradient_noise;
    const PointEstimate est = std::visit(
        [&](const auto& f) { return estimate_mean(f, spec, options, x_star, rng, i); },
        potential);
    BiasPoint point;
    point.alpha = spec.alpha;
    point.diverged = est.diverged;
    if (!est.diverged) {
      point.bias = est.mean - x_star;
      point.standard_error = est.standard_error;
      point.bias_norm = point.bias.norm();
    }
    result.points.push_back(std::move(point));
  }
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : result.points) {
    if (p.diverged || !(p.bias_norm > 0.0)) continue;
    const double x = std::log(p.alpha), y = std::log(p.bias_norm);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  if (n < 2) throw NumericalError("bias scaling: fewer than two usable grid points");
  result.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  result.intercept = (sy - result.slope * sx) / n;
  return result;
}

DecayResult fit_exponential_floor(const std::vector<double>& y) {
  require(y.size() >= 4, "fit: need at least four points");
  const std::size_t n = y.size();
  // For a fixed rate the model is linear in (amplitude, floor).
  auto solve = [&](double rate, double& amp, double& floor) {
    double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0, p = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
      s11 += p * p;
      s12 += p;
      s22 += 1.0;
      b1 += p * y[t];
      b2 += y[t];
      p *= rate;
    }
    const double det = s11 * s22 - s12 * s12;
    amp = (b1 * s22 - b2 * s12) / det;
    floor = (s11 * b2 - s12 * b1) / det;
    double sse = 0.0;
    p = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double r = y[t] - amp * p - floor;
      sse += r * r;
      p *= rate;
    }
    return sse;
  };
  // Profile over rate = exp(-s) with s log-spaced, then refine by golden
  // section between the neighbours of the best grid point.
  constexpr int kGrid = 800;
  const double log_lo = std::log(1e-7), log_hi = std::log(20.0);
  auto rate_at = [&](int k) {
    return std::exp(-std::exp(log_lo + (log_hi - log_lo) * k / kGrid));
  };
  int best_k = 0;
  double best_sse = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kGrid; ++k) {
    double a, f;
    const double sse = solve(rate_at(k), a, f);
    if (sse < best_sse) {
      best_sse = sse;
      best_k = k;
    }
  }
  double lo = rate_at(std::min(best_k + 1, kGrid)), hi = rate_at(std::max(best_k - 1, 0));
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a, f;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
    if (solve(m1, a, f) < solve(m2, a, f)) hi = m2; else lo = m1;
  }
  DecayResult out;
  out.rate = 0.5 * (lo + hi);
  solve(out.rate, out.amplitude, out.floor);
  out.converged = best_k > 0 && best_k < kGrid && out.amplitude > 0.0 &&
                  out.floor >= -1e-12 * std::max(1.0, out.amplitude);
  out.mean_squared_distance = y;
  return out;
}

DecayResult squared_distance_decay(const Potential& potential, const DecayOptions& options,
                                   RngStream& rng) {
  const double mu = potential_mu(potential);
  require(options.alpha > 0.0, "alpha: must be > 0");
  require(options.delta > 0.0 && options.delta <= 1.0, "delta: must lie in (0, 1]");
  require(2.0 * options.alpha * options.delta * mu < 1.0,
          "alpha: decay needs 2 alpha delta mu < 1");
  require(options.replicas >= 1, "replicas: must be >= 1");
  require(options.chain_length >= 4, "chain_length: must be >= 4");
  const Vector x_star = potential_minimizer(potential);
  const Vector x0 = x_star + Vector::Constant(x_star.size(), options.init_offset);
  ChainSpec spec;
  spec.alpha = options.alpha;
  spec.beta_mode = BetaMode::Adaptive;
  spec.delta = options.delta;
  spec.noise = ChainNoise::Gradient;
  spec.noise_scale = options.gradient_noise;
  std::vector<double> msd(static_cast<std::size_t>(options.chain_length + 1), 0.0);
  std::visit(
      [&](const auto& f) {
        using P = std::decay_t<decltype(f)>;
        for (int r = 0; r < options.replicas; ++r) {
          RngStream stream = rng.split(static_cast<std::uint64_t>(r));
          HeavyBallChain<P> chain(f, spec, x0);
          msd[0] += (x0 - x_star).squaredNorm();
          for (std::int64_t t = 1; t <= options.chain_length; ++t) {
            chain.step(stream);
            msd[static_cast<std::size_t>(t)] += (chain.x() - x_star).squaredNorm();
          }
        }
      },
      potential);
  for (double& v : msd) v /= options.replicas;
  for (double v : msd) {
    if (!std::isfinite(v) || v > 1e12) {
      DecayResult out;
      out.mean_squared_distance = msd;
      return out;
    }
  }
  return fit_exponential_floor(msd);
}

}  // namespace amsample
