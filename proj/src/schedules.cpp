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

#include "amsample/schedules.hpp"

#include <cmath>
#include <string>

namespace amsample {

NoiseSchedule NoiseSchedule::create(std::vector<double> sigmas, int n_sigma,
                                    double epsilon, double delta) {
  require(!sigmas.empty(), "sigmas: schedule needs at least one level");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    require(std::isfinite(sigmas[i]) && sigmas[i] > 0.0,
            "sigmas: level " + std::to_string(i) + " must be positive");
    if (i > 0) {
      require(sigmas[i] < sigmas[i - 1],
              "sigmas: must be strictly decreasing at level " + std::to_string(i));
    }
  }
  require(n_sigma >= 1, "n_sigma: must be >= 1");
  require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon: must be > 0");
  require(delta > 0.0 && delta <= 1.0, "delta: must lie in (0, 1]");
  return NoiseSchedule(std::move(sigmas), n_sigma, epsilon, delta);
}

double NoiseSchedule::sigma(std::size_t level) const {
  require(level < sigmas_.size(), "level: index " + std::to_string(level) +
                                      " out of range");
  return sigmas_[level];
}

NoiseSchedule NoiseSchedule::with_epsilon(double epsilon) const {
  return create(sigmas_, n_sigma_, epsilon, delta_);
}

NoiseSchedule NoiseSchedule::with_delta(double delta) const {
  return create(sigmas_, n_sigma_, epsilon_, delta);
}

NoiseSchedule geometric_schedule(double sigma_max, double sigma_min, int n,
                                 int n_sigma, double epsilon, double delta) {
  require(sigma_min > 0.0, "sigma_min: must be > 0");
  require(sigma_max > sigma_min, "sigma_max: must exceed sigma_min");
  require(n >= 2, "n: geometric schedule needs at least 2 levels");
  std::vector<double> sigmas(static_cast<std::size_t>(n));
  const double log_ratio = std::log(sigma_min / sigma_max);
  sigmas.front() = sigma_max;
  for (int i = 1; i + 1 < n; ++i) {
    sigmas[i] = sigma_max * std::exp(log_ratio * i / (n - 1));
  }
  sigmas.back() = sigma_min;
  return NoiseSchedule::create(std::move(sigmas), n_sigma, epsilon, delta);
}

double als_step_size(const NoiseSchedule& schedule, std::size_t level) {
  const double ratio = schedule.sigma(level) / schedule.sigma_min();
  return schedule.epsilon() * ratio * ratio;
}

double momentum_step_size(double alpha, double beta) {
  require(alpha > 0.0, "alpha: must be > 0");
  require(beta >= 0.0 && beta < 1.0, "beta: must lie in [0, 1)");
  const double boost = 1.0 + beta;
  return alpha * boost * boost;
}

double snr_step_size(double epsilon, double beta, double m_norm, double z_norm,
                     Variant variant, double epsilon0) {
  require(z_norm > 0.0, "z_norm: degenerate noise draw");
  require(epsilon > 0.0, "epsilon: must be > 0");
  require(m_norm >= 0.0, "m_norm: must be >= 0");
  const double boost = (1.0 + beta) * (1.0 + beta);
  const double ratio = m_norm / z_norm;
  if (variant == Variant::VE) {
    const double root = epsilon * boost * ratio;
    return 2.0 * root * root;
  }
  require(epsilon0 > 0.0, "epsilon0: must be > 0");
  const double root = epsilon0 * boost * ratio;
  return 2.0 * epsilon * root * root;
}

}  // namespace amsample
