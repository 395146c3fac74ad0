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

#include "amsample/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace amsample {

namespace {

// Shared by the Langevin and momentum updates so that beta = 0 reproduces
// the Langevin iterate bit for bit.
Vector advance(const Vector& x, double drift_step, const Vector& direction,
               double noise_step, const Vector& noise) {
  return x + drift_step * direction + std::sqrt(2.0 * noise_step) * noise;
}

Perturbation level_perturbation(Variant variant, double sigma) {
  return variant == Variant::VE ? Perturbation::ve(sigma)
                                : Perturbation::vp(vp_alpha_bar(sigma));
}

}  // namespace

SamplerState SamplerState::start(const Vector& x) {
  SamplerState s;
  s.x = x;
  s.x_prev = x;
  s.g_prev = Vector::Zero(x.size());
  s.m = Vector::Zero(x.size());
  return s;
}

void SamplerState::reset_momentum() {
  m.setZero();
  beta = 0.0;
  t = 0;
  x_prev = x;
}

void Diagnostics::record(int lvl, int inner, double beta, double step,
                         double score_norm) {
  level.push_back(lvl);
  inner_step.push_back(inner);
  beta_trace.push_back(beta);
  step_trace.push_back(step);
  score_norm_trace.push_back(score_norm);
}

Vector langevin_step(const Vector& x, const Vector& score, double alpha,
                     const Vector& noise) {
  require(alpha > 0.0, "alpha: must be > 0");
  return advance(x, alpha, score, alpha, noise);
}

double beta_update(double alpha, const Vector& x, const Vector& x_prev,
                   const Vector& g, const Vector& g_prev, double delta,
                   std::int64_t t, double previous_beta) {
  if (t <= 1) return 0.0;
  const double dx = (x - x_prev).norm();
  if (dx == 0.0) return previous_beta;
  const double r = alpha * (g - g_prev).norm() / dx;
  const double fraction = (1.0 - r) / (1.0 + r);
  const double projected = std::clamp(fraction, 0.0, 1.0 - delta);
  return projected * projected;
}

SamplerState nshb_step(const SamplerState& state, const Vector& score, double alpha,
                       double alpha_tilde, double beta, const Vector& noise) {
  require(alpha > 0.0, "alpha: must be > 0");
  SamplerState next;
  next.m = beta * state.m + (1.0 - beta) * score;
  next.x = advance(state.x, alpha_tilde, next.m, alpha, noise);
  next.x_prev = state.x;
  next.g_prev = score;
  next.beta = beta;
  next.alpha = alpha;
  next.alpha_tilde = alpha_tilde;
  next.t = state.t + 1;
  next.nfe = state.nfe;
  return next;
}

Vector tweedie_denoise(const Vector& x, const Vector& score_at_sigma, double sigma) {
  require(sigma > 0.0, "sigma: must be > 0");
  return x + (sigma * sigma) * score_at_sigma;
}

Vector tweedie_denoise_vp(const Vector& x, const Vector& score, double alpha_bar) {
  require(alpha_bar > 0.0 && alpha_bar <= 1.0, "alpha_bar: must lie in (0, 1]");
  return (x + (1.0 - alpha_bar) * score) / std::sqrt(alpha_bar);
}

SampleResult als_sample(const ScoreModel& model, const NoiseSchedule& schedule,
                        const Vector& init, NoiseSource& noise, bool denoise) {
  require(init.size() == model.dim(), "init: dimension mismatch with model");
  SampleResult out;
  Vector x = init;
  Vector z(x.size());
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double sigma = schedule.sigma(i);
    const double alpha = als_step_size(schedule, i);
    for (int k = 0; k < schedule.n_sigma(); ++k) {
      noise.normal(z);
      const Vector g = model.score(x, sigma);
      ++out.nfe;
      x = langevin_step(x, g, alpha, z);
      out.diagnostics.record(static_cast<int>(i), k, 0.0, alpha, g.norm());
    }
  }
  if (denoise) {
    const Vector g = model.score(x, schedule.sigma_min());
    ++out.nfe;
    x = tweedie_denoise(x, g, schedule.sigma_min());
  }
  out.x = std::move(x);
  return out;
}

SampleResult ams_sample(const ScoreModel& model, const NoiseSchedule& schedule,
                        const Vector& init, NoiseSource& noise, bool denoise,
                        AmsOptions options) {
  require(init.size() == model.dim(), "init: dimension mismatch with model");
  SampleResult out;
  SamplerState state = SamplerState::start(init);
  Vector z(init.size());
  double carried_beta = 0.0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double sigma = schedule.sigma(i);
    const double alpha = als_step_size(schedule, i);
    const double level_alpha_tilde = momentum_step_size(alpha, carried_beta);
    state.reset_momentum();
    for (int k = 0; k < schedule.n_sigma(); ++k) {
      noise.normal(z);
      const Vector g = model.score(state.x, sigma);
      ++state.nfe;
      const double beta = beta_update(alpha, state.x, state.x_prev, g, state.g_prev,
                                      schedule.delta(), state.t, state.beta);
      const double alpha_tilde = options.alpha_tilde == AlphaTildeMode::PerStep
                                     ? momentum_step_size(alpha, beta)
                                     : level_alpha_tilde;
      state = nshb_step(state, g, alpha, alpha_tilde, beta, z);
      out.diagnostics.record(static_cast<int>(i), k, beta, alpha_tilde, g.norm());
    }
    carried_beta = state.beta;
  }
  Vector x = state.x;
  out.nfe = state.nfe;
  if (denoise) {
    const Vector g = model.score(x, schedule.sigma_min());
    ++out.nfe;
    x = tweedie_denoise(x, g, schedule.sigma_min());
  }
  out.x = std::move(x);
  return out;
}

Variant predictor_variant(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::EulerMaruyamaVE:
    case PredictorKind::ReverseDiffusionVE:
      return Variant::VE;
    case PredictorKind::ReverseDiffusionVP:
    case PredictorKind::EulerMaruyamaVP:
      return Variant::VP;
  }
  return Variant::VE;
}

Vector predictor_step(PredictorKind kind, const Vector& x, const Vector& score,
                      const PredictorLevel& level, const Vector& noise) {
  if (predictor_variant(kind) == Variant::VE) {
    require(level.sigma_lo >= 0.0, "sigma_lo: must be >= 0");
    require(level.sigma_hi >= level.sigma_lo,
            "sigma_hi: reverse move requires sigma_hi >= sigma_lo");
    double g2 = 0.0;
    if (kind == PredictorKind::ReverseDiffusionVE) {
      g2 = level.sigma_hi * level.sigma_hi - level.sigma_lo * level.sigma_lo;
    } else {
      require(level.sigma_lo > 0.0, "sigma_lo: Euler-Maruyama VE needs sigma_lo > 0");
      g2 = 2.0 * level.sigma_hi * level.sigma_hi *
           std::log(level.sigma_hi / level.sigma_lo);
    }
    return x + g2 * score + std::sqrt(g2) * noise;
  }
  require(level.beta >= 0.0 && level.beta < 1.0, "beta: VP coefficient must lie in [0, 1)");
  const double b = level.beta;
  const double gain = kind == PredictorKind::ReverseDiffusionVP
                          ? 2.0 - std::sqrt(1.0 - b)
                          : 1.0 + 0.5 * b;
  return gain * x + b * score + std::sqrt(b) * noise;
}

SamplerState corrector_step(CorrectorKind kind, const SamplerState& state,
                            const ScoreModel& model, const Perturbation& level,
                            const CorrectorParams& params, NoiseSource& noise) {
  require(params.epsilon > 0.0, "epsilon: must be > 0");
  Vector z = noise.normal(state.x.size());
  double z_norm = z.norm();
  if (z_norm == 0.0) {
    noise.normal(z);
    z_norm = z.norm();
    if (z_norm == 0.0) throw NumericalError("corrector: degenerate noise draw (|z| = 0)");
  }
  const Vector g = model.score(state.x, level);
  const double delta = kind == CorrectorKind::Langevin ? 1.0 : params.delta;
  const double beta = beta_update(state.alpha, state.x, state.x_prev, g, state.g_prev,
                                  delta, state.t, state.beta);
  const double epsilon0 = params.epsilon0 > 0.0 ? params.epsilon0 : params.epsilon;
  const Vector m = beta * state.m + (1.0 - beta) * g;
  const double m_norm = m.norm();
  if (!std::isfinite(m_norm)) {
    // Diverged chain: let the non-finite state propagate to the caller.
    SamplerState next = state;
    next.x.setConstant(std::numeric_limits<double>::quiet_NaN());
    next.nfe = state.nfe + 1;
    return next;
  }
  double alpha = snr_step_size(params.epsilon, beta, m_norm, z_norm, params.variant, epsilon0);
  if (alpha == 0.0) {
    // Zero momentum (flat score at a fresh level): fall back to a unit ratio.
    alpha = snr_step_size(params.epsilon, beta, 1.0, 1.0, params.variant, epsilon0);
  }
  SamplerState next = nshb_step(state, g, alpha, alpha, beta, z);
  next.nfe = state.nfe + 1;
  return next;
}

double vp_alpha_bar(double sigma) {
  require(sigma >= 0.0, "sigma: must be >= 0");
  return 1.0 / (1.0 + sigma * sigma);
}

double pc_prior_sigma(const NoiseSchedule& schedule) {
  require(schedule.size() >= 2, "n: predictor samplers need at least 2 levels");
  return schedule.sigma(0) * schedule.sigma(0) / schedule.sigma(1);
}

SampleResult pc_sample(const PcSpec& spec, const ScoreModel& model,
                       const NoiseSchedule& schedule, const Vector& init,
                       NoiseSource& noise, bool denoise) {
  require(spec.predictor || spec.corrector, "sampler: needs a predictor or a corrector");
  require(init.size() == model.dim(), "init: dimension mismatch with model");
  if (spec.predictor) {
    require(predictor_variant(*spec.predictor) == spec.variant,
            "variant: predictor kind does not match the SDE variant");
  }
  const CorrectorParams params{schedule.epsilon(), schedule.delta(), spec.variant,
                               spec.epsilon0};
  SampleResult out;
  SamplerState state = SamplerState::start(init);
  Vector z(init.size());
  double departure = spec.predictor ? pc_prior_sigma(schedule) : 0.0;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double sigma = schedule.sigma(i);
    if (spec.predictor) {
      noise.normal(z);
      const Vector g = model.score(state.x, level_perturbation(spec.variant, departure));
      ++state.nfe;
      const PredictorLevel move =
          spec.variant == Variant::VE
              ? PredictorLevel::ve(departure, sigma)
              : PredictorLevel::vp(1.0 - vp_alpha_bar(departure) / vp_alpha_bar(sigma));
      state.x = predictor_step(*spec.predictor, state.x, g, move, z);
      departure = sigma;
    }
    if (spec.corrector) {
      const Perturbation level = level_perturbation(spec.variant, sigma);
      state.reset_momentum();
      for (int k = 0; k < schedule.n_sigma(); ++k) {
        state = corrector_step(*spec.corrector, state, model, level, params, noise);
        out.diagnostics.record(static_cast<int>(i), k, state.beta, state.alpha_tilde,
                               state.g_prev.norm());
      }
    }
  }
  Vector x = state.x;
  out.nfe = state.nfe;
  if (denoise) {
    const double sigma_n = schedule.sigma_min();
    const Vector g = model.score(x, level_perturbation(spec.variant, sigma_n));
    ++out.nfe;
    x = spec.variant == Variant::VE ? tweedie_denoise(x, g, sigma_n)
                                    : tweedie_denoise_vp(x, g, vp_alpha_bar(sigma_n));
  }
  out.x = std::move(x);
  return out;
}

}  // namespace amsample
