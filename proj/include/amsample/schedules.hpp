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

#ifndef AMSAMPLE_SCHEDULES_HPP
#define AMSAMPLE_SCHEDULES_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "amsample/core.hpp"

namespace amsample {

/// Which forward diffusion a noise level refers to.
enum class Variant { VE, VP };

/// Descending ladder of noise scales plus the step-size hyperparameters that
/// every sampler consumes.
///
/// Levels are indexed from 0 (largest sigma) to size() - 1 (smallest sigma).
class NoiseSchedule {
 public:
  /// Validates and builds a schedule. Sigmas must be strictly decreasing and
  /// positive, n_sigma >= 1, epsilon > 0 and 0 < delta <= 1.
  static NoiseSchedule create(std::vector<double> sigmas, int n_sigma,
                              double epsilon, double delta);

  std::span<const double> sigmas() const { return sigmas_; }
  std::size_t size() const { return sigmas_.size(); }
  double sigma(std::size_t level) const;
  double sigma_max() const { return sigmas_.front(); }
  double sigma_min() const { return sigmas_.back(); }
  int n_sigma() const { return n_sigma_; }
  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }

  NoiseSchedule with_epsilon(double epsilon) const;
  NoiseSchedule with_delta(double delta) const;

 private:
  NoiseSchedule(std::vector<double> sigmas, int n_sigma, double epsilon,
                double delta)
      : sigmas_(std::move(sigmas)),
        n_sigma_(n_sigma),
        epsilon_(epsilon),
        delta_(delta) {}

  std::vector<double> sigmas_;
  int n_sigma_;
  double epsilon_;
  double delta_;
};

/// Log-spaced ladder from sigma_max down to sigma_min (both endpoints exact).
NoiseSchedule geometric_schedule(double sigma_max, double sigma_min, int n,
                                 int n_sigma, double epsilon, double delta);

/// Annealed Langevin step for a level: epsilon * sigma_i^2 / sigma_n^2.
double als_step_size(const NoiseSchedule& schedule, std::size_t level);

/// Momentum-corrected step alpha * (1 + beta)^2.
double momentum_step_size(double alpha, double beta);

/// Signal-to-noise corrector step driven by the momentum and noise norms.
///
///   VE: 2 (eps (1+beta)^2 |m| / |z|)^2
///   VP: 2 eps (eps0 (1+beta)^2 |m| / |z|)^2
///
/// Returns 0 when m_norm is 0; callers decide how to handle that case.
double snr_step_size(double epsilon, double beta, double m_norm, double z_norm,
                     Variant variant, double epsilon0);

}  // namespace amsample

#endif  // AMSAMPLE_SCHEDULES_HPP
