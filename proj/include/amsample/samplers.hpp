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

#ifndef AMSAMPLE_SAMPLERS_HPP
#define AMSAMPLE_SAMPLERS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "amsample/core.hpp"
#include "amsample/rng.hpp"
#include "amsample/schedules.hpp"
#include "amsample/score_models.hpp"

namespace amsample {

/// Chain state carried between momentum updates.
struct SamplerState {
  Vector x;
  Vector x_prev;
  Vector g_prev;  ///< score evaluated at x_prev
  Vector m;       ///< momentum accumulator
  double beta = 0.0;
  double alpha = 0.0;        ///< noise step of the last update
  double alpha_tilde = 0.0;  ///< drift step of the last update
  std::int64_t t = 0;        ///< updates since the last reset
  std::int64_t nfe = 0;

  static SamplerState start(const Vector& x);
  /// Clears momentum, beta and the step counter; position is kept.
  void reset_momentum();
};

/// Per-update traces, one entry per corrector/Langevin update.
struct Diagnostics {
  std::vector<int> level;
  std::vector<int> inner_step;
  std::vector<double> beta_trace;
  std::vector<double> step_trace;  ///< drift step actually applied
  std::vector<double> score_norm_trace;

  void record(int lvl, int inner, double beta, double step, double score_norm);
  std::size_t size() const { return beta_trace.size(); }
};

struct SampleResult {
  Vector x;
  Diagnostics diagnostics;
  std::int64_t nfe = 0;
};

/// x + alpha * score + sqrt(2 alpha) * noise.
Vector langevin_step(const Vector& x, const Vector& score, double alpha,
                     const Vector& noise);

/// Adaptive momentum coefficient from successive positions and scores.
///
/// With r = alpha |g - g_prev| / |x - x_prev| the result is
/// clamp((1 - r) / (1 + r), 0, 1 - delta)^2, so it always lies in
/// [0, (1 - delta)^2]. Returns 0 for t <= 1 and `previous_beta` when the
/// position did not move.
double beta_update(double alpha, const Vector& x, const Vector& x_prev,
                   const Vector& g, const Vector& g_prev, double delta,
                   std::int64_t t, double previous_beta = 0.0);

/// One normalised heavy-ball sampling update:
///   m' = beta m + (1 - beta) score
///   x' = x + alpha_tilde m' + sqrt(2 alpha) noise
/// The returned state records the old position and `score` for the next
/// beta_update. nfe is left untouched.
SamplerState nshb_step(const SamplerState& state, const Vector& score, double alpha,
                       double alpha_tilde, double beta, const Vector& noise);

/// Posterior-mean (Tweedie) correction x + sigma^2 score for VE levels.
Vector tweedie_denoise(const Vector& x, const Vector& score_at_sigma, double sigma);
/// VP counterpart (x + (1 - abar) score) / sqrt(abar).
Vector tweedie_denoise_vp(const Vector& x, const Vector& score, double alpha_bar);

/// When the momentum-corrected drift step is recomputed.
enum class AlphaTildeMode {
  PerStep,   ///< from the beta of the current update
  PerLevel,  ///< once per level, from the last beta of the previous level
};

struct AmsOptions {
  AlphaTildeMode alpha_tilde = AlphaTildeMode::PerStep;
};

/// Annealed Langevin sampling over all levels of `schedule`.
SampleResult als_sample(const ScoreModel& model, const NoiseSchedule& schedule,
                        const Vector& init, NoiseSource& noise, bool denoise);

/// Adaptive momentum sampling. Momentum and beta restart at each level.
SampleResult ams_sample(const ScoreModel& model, const NoiseSchedule& schedule,
                        const Vector& init, NoiseSource& noise, bool denoise,
                        AmsOptions options = {});

// --- Predictor-corrector samplers ------------------------------------------

enum class PredictorKind {
  EulerMaruyamaVE,
  ReverseDiffusionVE,
  ReverseDiffusionVP,
  EulerMaruyamaVP,
};

Variant predictor_variant(PredictorKind kind);

/// Parameters of one predictor move. VE moves go from sigma_hi down to
/// sigma_lo; VP moves use the discrete forward coefficient beta.
struct PredictorLevel {
  double sigma_hi = 0.0;
  double sigma_lo = 0.0;
  double beta = 0.0;

  static PredictorLevel ve(double sigma_hi, double sigma_lo) {
    return {sigma_hi, sigma_lo, 0.0};
  }
  static PredictorLevel vp(double beta) { return {0.0, 0.0, beta}; }
};

/// One reverse-diffusion move; `score` is evaluated at the departure level.
///
///   RD-VE: x + g2 score + sqrt(g2) noise,      g2 = sigma_hi^2 - sigma_lo^2
///   EM-VE: same form with g2 = 2 sigma_hi^2 log(sigma_hi / sigma_lo)
///   RD-VP: (2 - sqrt(1 - beta)) x + beta score + sqrt(beta) noise
///   EM-VP: (1 + beta / 2) x + beta score + sqrt(beta) noise
Vector predictor_step(PredictorKind kind, const Vector& x, const Vector& score,
                      const PredictorLevel& level, const Vector& noise);

enum class CorrectorKind {
  Momentum,  ///< adaptive-beta momentum corrector
  Langevin,  ///< beta = 0 specialisation
};

struct CorrectorParams {
  double epsilon = 0.0;
  double delta = 1.0;
  Variant variant = Variant::VE;
  double epsilon0 = 0.0;  ///< VP only; <= 0 means "same as epsilon"
};

/// One corrector update at a fixed noise level. Draws the noise z first,
/// then evaluates the score and beta, and applies a signal-to-noise step
/// computed from the updated momentum. A zero-norm draw is redrawn once.
SamplerState corrector_step(CorrectorKind kind, const SamplerState& state,
                            const ScoreModel& model, const Perturbation& level,
                            const CorrectorParams& params, NoiseSource& noise);

struct PcSpec {
  std::optional<PredictorKind> predictor;
  std::optional<CorrectorKind> corrector;
  Variant variant = Variant::VE;
  double epsilon0 = 0.0;
};

/// abar of the VP level matched to a VE scale: 1 / (1 + sigma^2).
double vp_alpha_bar(double sigma);

/// Departure scale of the first predictor move: sigma_1^2 / sigma_2, one
/// ratio above the top of the ladder. The predictor at level i moves from
/// the scale of level i-1 to that of level i.
double pc_prior_sigma(const NoiseSchedule& schedule);

/// Predictor-corrector composition: per level one predictor move (when a
/// predictor is set) followed by n_sigma corrector updates (when set).
SampleResult pc_sample(const PcSpec& spec, const ScoreModel& model,
                       const NoiseSchedule& schedule, const Vector& init,
                       NoiseSource& noise, bool denoise);

}  // namespace amsample

#endif  // AMSAMPLE_SAMPLERS_HPP
