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

#ifndef AMSAMPLE_SCORE_MODELS_HPP
#define AMSAMPLE_SCORE_MODELS_HPP

#include <string_view>
#include <variant>
#include <vector>

#include "amsample/core.hpp"
#include "amsample/rng.hpp"

namespace amsample {

/// Forward-noising of clean data: x_noisy = scale * x + sigma * n.
///
/// VE levels keep scale = 1; VP levels use scale = sqrt(abar) and
/// sigma = sqrt(1 - abar).
struct Perturbation {
  double scale = 1.0;
  double sigma = 0.0;

  static Perturbation ve(double sigma) { return {1.0, sigma}; }
  static Perturbation vp(double alpha_bar);
};

/// Exact score oracle standing in for a trained noise-conditional network.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  virtual Eigen::Index dim() const = 0;
  virtual Vector score(const Vector& x, const Perturbation& level) const = 0;

  Vector score(const Vector& x, double sigma) const {
    return score(x, Perturbation::ve(sigma));
  }
};

/// Isotropic Gaussian mixture; perturbation maps component k to
/// N(scale * mu_k, (scale^2 v_k + sigma^2) I), so every noise level has a
/// closed-form density and score.
class GaussianMixture final : public ScoreModel {
 public:
  /// `means` holds one component mean per column (d x K).
  static GaussianMixture create(std::vector<double> weights, Matrix means,
                                std::vector<double> variances);

  Eigen::Index dim() const override { return means_.rows(); }
  std::size_t components() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const Matrix& means() const { return means_; }
  const std::vector<double>& variances() const { return variances_; }

  using ScoreModel::score;
  Vector score(const Vector& x, const Perturbation& level) const override;
  double log_density(const Vector& x, const Perturbation& level) const;

  /// Draws `n` points from the clean mixture, one per row.
  Matrix sample(std::size_t n, RngStream& rng) const;

  Vector mean() const;
  Matrix covariance() const;

 private:
  GaussianMixture(std::vector<double> weights, Matrix means,
                  std::vector<double> variances);

  // Log-weight of each component at `x` (unnormalised posterior) plus the
  // per-component perturbed variance.
  void component_terms(const Vector& x, const Perturbation& level,
                       Eigen::Ref<Vector> log_terms,
                       Eigen::Ref<Vector> variances) const;

  std::vector<double> weights_;
  Matrix means_;
  std::vector<double> variances_;
  Vector log_weights_;
  bool uniform_variance_ = false;
};

Vector perturbed_score(const GaussianMixture& model, const Vector& x, double sigma);
double perturbed_log_density(const GaussianMixture& model, const Vector& x,
                             double sigma);

/// f(x) = 1/2 x^T A x + b^T x + c with A symmetric positive definite.
class QuadraticPotential {
 public:
  static QuadraticPotential create(Matrix A, Vector b, double c = 0.0);

  Eigen::Index dim() const { return A_.rows(); }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  double c() const { return c_; }
  double mu() const { return mu_; }
  double L() const { return L_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Vector minimizer() const;

 private:
  QuadraticPotential(Matrix A, Vector b, double c, double mu, double L)
      : A_(std::move(A)), b_(std::move(b)), c_(c), mu_(mu), L_(L) {}

  Matrix A_;
  Vector b_;
  double c_;
  double mu_;
  double L_;
};

/// f(x) = kappa/2 |x|^2 + sum_j log cosh(x_j - shift_j).
///
/// Strongly convex with mu = kappa and L = kappa + 1. The third derivative
/// vanishes only where x_j = shift_j, so a nonzero shift moves the minimiser
/// off the symmetry point and gives a nonzero third derivative there.
class NonQuadraticPotential {
 public:
  static NonQuadraticPotential create(double kappa, Vector shift);
  static NonQuadraticPotential create(double kappa, Eigen::Index dim) {
    return create(kappa, Vector::Zero(dim));
  }

  Eigen::Index dim() const { return shift_.size(); }
  double kappa() const { return kappa_; }
  const Vector& shift() const { return shift_; }
  double mu() const { return kappa_; }
  double L() const { return kappa_ + 1.0; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  /// Diagonal of the Hessian (the Hessian is diagonal).
  Vector hessian_diagonal(const Vector& x) const;
  /// Diagonal third derivative d^3 f / dx_j^3.
  Vector third_derivative(const Vector& x) const;
  Vector minimizer() const;

 private:
  NonQuadraticPotential(double kappa, Vector shift)
      : kappa_(kappa), shift_(std::move(shift)) {}

  double kappa_;
  Vector shift_;
};

using Potential = std::variant<QuadraticPotential, NonQuadraticPotential>;

Vector potential_gradient(const Potential& potential, const Vector& x);
double potential_value(const Potential& potential, const Vector& x);
Vector potential_minimizer(const Potential& potential);
double potential_mu(const Potential& potential);
double potential_L(const Potential& potential);
Eigen::Index potential_dim(const Potential& potential);

/// Score of the Gibbs density exp(-f): -grad f, independent of noise level.
class PotentialScore final : public ScoreModel {
 public:
  explicit PotentialScore(Potential potential) : potential_(std::move(potential)) {}
  Eigen::Index dim() const override { return potential_dim(potential_); }
  using ScoreModel::score;
  Vector score(const Vector& x, const Perturbation&) const override {
    return -potential_gradient(potential_, x);
  }
  const Potential& potential() const { return potential_; }

 private:
  Potential potential_;
};

/// Named mixture presets: "gauss1d", "grid25", "swissroll-mixture".
GaussianMixture make_preset(std::string_view name);
std::vector<std::string_view> preset_names();

}  // namespace amsample

#endif  // AMSAMPLE_SCORE_MODELS_HPP
