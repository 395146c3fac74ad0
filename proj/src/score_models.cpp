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

#include "amsample/score_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace amsample {

Perturbation Perturbation::vp(double alpha_bar) {
  require(alpha_bar > 0.0 && alpha_bar <= 1.0, "alpha_bar: must lie in (0, 1]");
  return {std::sqrt(alpha_bar), std::sqrt(1.0 - alpha_bar)};
}

// --- GaussianMixture ---------------------------------------------------------

GaussianMixture::GaussianMixture(std::vector<double> weights, Matrix means,
                                 std::vector<double> variances)
    : weights_(std::move(weights)),
      means_(std::move(means)),
      variances_(std::move(variances)),
      log_weights_(static_cast<Eigen::Index>(weights_.size())) {
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    log_weights_[static_cast<Eigen::Index>(k)] = std::log(weights_[k]);
  }
  uniform_variance_ = std::all_of(variances_.begin(), variances_.end(),
                                  [&](double v) { return v == variances_.front(); });
}

GaussianMixture GaussianMixture::create(std::vector<double> weights, Matrix means,
                                        std::vector<double> variances) {
  require(!weights.empty(), "weights: mixture needs at least one component");
  require(means.rows() >= 1, "means: dimension must be >= 1");
  require(static_cast<std::size_t>(means.cols()) == weights.size(),
          "means: expected one column per component");
  require(variances.size() == weights.size(),
          "variances: expected one variance per component");
  for (double w : weights) require(w > 0.0, "weights: must be positive");
  for (double v : variances) {
    require(std::isfinite(v) && v > 0.0, "variances: must be positive");
  }
  require(means.allFinite(), "means: must be finite");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(std::abs(total - 1.0) <= 1e-12, "weights: must sum to 1");
  return GaussianMixture(std::move(weights), std::move(means), std::move(variances));
}

void GaussianMixture::component_terms(const Vector& x, const Perturbation& level,
                                      Eigen::Ref<Vector> log_terms,
                                      Eigen::Ref<Vector> variances) const {
  const double d = static_cast<double>(dim());
  const double s2 = level.sigma * level.sigma;
  const double a2 = level.scale * level.scale;
  for (Eigen::Index k = 0; k < means_.cols(); ++k) {
    const double var = a2 * variances_[static_cast<std::size_t>(k)] + s2;
    const double dist2 = (x - level.scale * means_.col(k)).squaredNorm();
    variances[k] = var;
    log_terms[k] = log_weights_[k] -
                   0.5 * d * std::log(2.0 * std::numbers::pi * var) -
                   0.5 * dist2 / var;
  }
}

Vector GaussianMixture::score(const Vector& x, const Perturbation& level) const {
  require(x.size() == dim(), "x: dimension mismatch");
  const Eigen::Index K = means_.cols(), d = dim();
  const double s2 = level.sigma * level.sigma;
  const double a2 = level.scale * level.scale;
  // Scratch reused across calls; this is the innermost loop of every sampler.
  thread_local std::vector<double> log_terms, inv_vars;
  log_terms.resize(static_cast<std::size_t>(K));
  inv_vars.resize(static_cast<std::size_t>(K));
  const double shared_norm =
      uniform_variance_ ? 0.5 * static_cast<double>(d) *
                              std::log(2.0 * std::numbers::pi * (a2 * variances_[0] + s2))
                        : 0.0;
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const double var = a2 * variances_[ks] + s2;
    double dist2 = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double diff = x[j] - level.scale * means_(j, k);
      dist2 += diff * diff;
    }
    const double norm = uniform_variance_
                            ? shared_norm
                            : 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * var);
    inv_vars[ks] = 1.0 / var;
    log_terms[ks] = log_weights_[k] - norm - 0.5 * dist2 * inv_vars[ks];
    top = std::max(top, log_terms[ks]);
  }
  Vector out = Vector::Zero(d);
  double total = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const double r = std::exp(log_terms[ks] - top);
    total += r;
    const double w = r * inv_vars[ks];
    for (Eigen::Index j = 0; j < d; ++j) out[j] += w * (level.scale * means_(j, k) - x[j]);
  }
  out /= total;
  return out;
}

double GaussianMixture::log_density(const Vector& x, const Perturbation& level) const {
  require(x.size() == dim(), "x: dimension mismatch");
  const Eigen::Index K = means_.cols();
  Vector log_terms(K), vars(K);
  component_terms(x, level, log_terms, vars);
  const double top = log_terms.maxCoeff();
  return top + std::log((log_terms.array() - top).exp().sum());
}

Matrix GaussianMixture::sample(std::size_t n, RngStream& rng) const {
  Matrix out(static_cast<Eigen::Index>(n), dim());
  std::vector<double> cumulative(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative.begin());
  Vector noise(dim());
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto k = static_cast<Eigen::Index>(
        std::min<std::size_t>(it - cumulative.begin(), weights_.size() - 1));
    rng.normal(noise);
    out.row(static_cast<Eigen::Index>(i)) =
        (means_.col(k) + std::sqrt(variances_[static_cast<std::size_t>(k)]) * noise)
            .transpose();
  }
  return out;
}

Vector GaussianMixture::mean() const {
  Vector m = Vector::Zero(dim());
  for (Eigen::Index k = 0; k < means_.cols(); ++k) {
    m += weights_[static_cast<std::size_t>(k)] * means_.col(k);
  }
  return m;
}

Matrix GaussianMixture::covariance() const {
  const Vector m = mean();
  Matrix c = Matrix::Zero(dim(), dim());
  for (Eigen::Index k = 0; k < means_.cols(); ++k) {
    const double w = weights_[static_cast<std::size_t>(k)];
    const Vector diff = means_.col(k) - m;
    c += w * (diff * diff.transpose());
    c.diagonal().array() += w * variances_[static_cast<std::size_t>(k)];
  }
  return c;
}

Vector perturbed_score(const GaussianMixture& model, const Vector& x, double sigma) {
  require(sigma >= 0.0, "sigma: must be >= 0");
  return model.score(x, Perturbation::ve(sigma));
}

double perturbed_log_density(const GaussianMixture& model, const Vector& x,
                             double sigma) {
  require(sigma >= 0.0, "sigma: must be >= 0");
  return model.log_density(x, Perturbation::ve(sigma));
}

// --- Potentials --------------------------------------------------------------

QuadraticPotential QuadraticPotential::create(Matrix A, Vector b, double c) {
  require(A.rows() == A.cols() && A.rows() >= 1, "A: must be square");
  require(b.size() == A.rows(), "b: dimension mismatch with A");
  require((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12, "A: must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
  require(eig.info() == Eigen::Success, "A: eigen-decomposition failed");
  const double mu = eig.eigenvalues().minCoeff();
  const double L = eig.eigenvalues().maxCoeff();
  require(mu > 0.0, "A: must be positive definite");
  return QuadraticPotential(std::move(A), std::move(b), c, mu, L);
}

double QuadraticPotential::value(const Vector& x) const {
  return 0.5 * x.dot(A_ * x) + b_.dot(x) + c_;
}

Vector QuadraticPotential::gradient(const Vector& x) const { return A_ * x + b_; }

Vector QuadraticPotential::minimizer() const { return -A_.llt().solve(b_); }

namespace {

double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

}  // namespace

NonQuadraticPotential NonQuadraticPotential::create(double kappa, Vector shift) {
  require(kappa > 0.0, "kappa: must be > 0");
  require(shift.size() >= 1, "shift: dimension must be >= 1");
  require(shift.allFinite(), "shift: must be finite");
  return NonQuadraticPotential(kappa, std::move(shift));
}

double NonQuadraticPotential::value(const Vector& x) const {
  double total = 0.5 * kappa_ * x.squaredNorm();
  for (Eigen::Index j = 0; j < x.size(); ++j) total += log_cosh(x[j] - shift_[j]);
  return total;
}

Vector NonQuadraticPotential::gradient(const Vector& x) const {
  return kappa_ * x + (x - shift_).array().tanh().matrix();
}

Vector NonQuadraticPotential::hessian_diagonal(const Vector& x) const {
  const Eigen::ArrayXd th = (x - shift_).array().tanh();
  return (kappa_ + 1.0 - th.square()).matrix();
}

Vector NonQuadraticPotential::third_derivative(const Vector& x) const {
  const Eigen::ArrayXd th = (x - shift_).array().tanh();
  return (-2.0 * th * (1.0 - th.square())).matrix();
}

Vector NonQuadraticPotential::minimizer() const {
  // Each coordinate solves kappa x + tanh(x - c) = 0, a strictly increasing
  // scalar equation with root in [-1/kappa, 1/kappa].
  Vector x(dim());
  for (Eigen::Index j = 0; j < dim(); ++j) {
    const double c = shift_[j];
    double lo = -1.0 / kappa_, hi = 1.0 / kappa_;
    double r = 0.0;
    for (int it = 0; it < 200; ++it) {
      const double g = kappa_ * r + std::tanh(r - c);
      if (g > 0.0) hi = r; else lo = r;
      const double th = std::tanh(r - c);
      double next = r - g / (kappa_ + 1.0 - th * th);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - r) <= 1e-16 * (1.0 + std::abs(r))) {
        r = next;
        break;
      }
      r = next;
    }
    x[j] = r;
  }
  return x;
}

Vector potential_gradient(const Potential& potential, const Vector& x) {
  return std::visit([&](const auto& p) { return p.gradient(x); }, potential);
}

double potential_value(const Potential& potential, const Vector& x) {
  return std::visit([&](const auto& p) { return p.value(x); }, potential);
}

Vector potential_minimizer(const Potential& potential) {
  return std::visit([](const auto& p) { return p.minimizer(); }, potential);
}

double potential_mu(const Potential& potential) {
  return std::visit([](const auto& p) { return p.mu(); }, potential);
}

double potential_L(const Potential& potential) {
  return std::visit([](const auto& p) { return p.L(); }, potential);
}

Eigen::Index potential_dim(const Potential& potential) {
  return std::visit([](const auto& p) { return p.dim(); }, potential);
}

// --- Presets -----------------------------------------------------------------

namespace {

GaussianMixture grid25() {
  Matrix means(2, 25);
  int k = 0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j, ++k) {
      means(0, k) = -4.0 + 2.0 * i;
      means(1, k) = -4.0 + 2.0 * j;
    }
  }
  return GaussianMixture::create(std::vector<double>(25, 1.0 / 25.0), means,
                                 std::vector<double>(25, 0.01));
}

GaussianMixture swissroll_mixture() {
  // Components placed uniformly in angle along t (cos t, t sin t), t in
  // [1.5 pi, 4.5 pi], scaled by 1/5.
  constexpr int kComponents = 64;
  Matrix means(2, kComponents);
  for (int k = 0; k < kComponents; ++k) {
    const double t = 1.5 * std::numbers::pi * (1.0 + 2.0 * k / (kComponents - 1.0));
    means(0, k) = t * std::cos(t) / 5.0;
    means(1, k) = t * std::sin(t) / 5.0;
  }
  return GaussianMixture::create(std::vector<double>(kComponents, 1.0 / kComponents),
                                 means, std::vector<double>(kComponents, 0.02));
}

}  // namespace

GaussianMixture make_preset(std::string_view name) {
  if (name == "gauss1d") {
    return GaussianMixture::create({1.0}, Matrix::Zero(1, 1), {1.0});
  }
  if (name == "grid25") return grid25();
  if (name == "swissroll-mixture") return swissroll_mixture();
  throw ValidationError("model_name: unknown preset '" + std::string(name) + "'");
}

std::vector<std::string_view> preset_names() {
  return {"gauss1d", "grid25", "swissroll-mixture"};
}

}  // namespace amsample
