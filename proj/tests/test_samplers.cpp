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

#include <cmath>
#include <vector>

#include "amsample/markov_analysis.hpp"
#include "amsample/rng.hpp"
#include "amsample/samplers.hpp"
#include "amsample/schedules.hpp"
#include "amsample/score_models.hpp"
#include "doctest.h"

using namespace amsample;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Wraps a model and records every point it is asked to score.
class RecordingScore final : public ScoreModel {
 public:
  explicit RecordingScore(const ScoreModel& inner) : inner_(inner) {}
  Eigen::Index dim() const override { return inner_.dim(); }
  using ScoreModel::score;
  Vector score(const Vector& x, const Perturbation& level) const override {
    points.push_back(x);
    return inner_.score(x, level);
  }
  mutable std::vector<Vector> points;

 private:
  const ScoreModel& inner_;
};

class ZeroScore final : public ScoreModel {
 public:
  explicit ZeroScore(Eigen::Index d) : d_(d) {}
  Eigen::Index dim() const override { return d_; }
  using ScoreModel::score;
  Vector score(const Vector& x, const Perturbation&) const override {
    return Vector::Zero(x.size());
  }

 private:
  Eigen::Index d_;
};

// Records every noise vector handed out.
class RecordingNoise final : public NoiseSource {
 public:
  explicit RecordingNoise(RngStream rng) : rng_(std::move(rng)) {}
  void normal(Eigen::Ref<Vector> out) override {
    rng_.normal(out);
    draws.push_back(out);
  }
  using NoiseSource::normal;
  std::vector<Vector> draws;

 private:
  RngStream rng_;
};

PotentialScore unit_quadratic(Eigen::Index d) {
  return PotentialScore(QuadraticPotential::create(Matrix::Identity(d, d), Vector::Zero(d)));
}

}  // namespace

TEST_CASE("langevin step examples") {
  CHECK(langevin_step(vec({1.0, 2.0}), Vector::Zero(2), 0.3, Vector::Zero(2)) == vec({1.0, 2.0}));
  CHECK(langevin_step(Vector::Zero(2), vec({1.0, 0.0}), 0.5, Vector::Zero(2)) == vec({0.5, 0.0}));
  RngStream rng(1, 0);
  for (int i = 0; i < 20; ++i) {
    const double x = rng.normal(), e = rng.normal(), a = 0.01 + 0.5 * rng.uniform();
    const double got = langevin_step(vec({x}), vec({-x}), a, vec({e}))(0);
    CHECK(got == doctest::Approx((1.0 - a) * x + std::sqrt(2.0 * a) * e).epsilon(1e-14));
  }
  CHECK_THROWS_AS(langevin_step(Vector::Zero(1), Vector::Zero(1), 0.0, Vector::Zero(1)),
                  ValidationError);
}

TEST_CASE("beta update examples") {
  const Vector x = vec({1.0}), xp = vec({2.0});
  CHECK(beta_update(0.5, x, xp, vec({3.0}), vec({3.0}), 0.1, 5) ==
        doctest::Approx(0.81).epsilon(1e-15));
  // r = 1: alpha |dg| / |dx| = 1.
  CHECK(beta_update(0.5, x, xp, vec({2.0}), vec({0.0}), 0.1, 5) == 0.0);
  // Quadratic a = 1, g = -x.
  CHECK(beta_update(0.5, x, xp, -x, -xp, 0.1, 5) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
  CHECK(beta_update(0.5, x, xp, -x, -xp, 0.1, 0) == 0.0);
  CHECK(beta_update(0.5, x, xp, -x, -xp, 0.1, 1) == 0.0);
  CHECK(beta_update(0.5, x, x, -x, -x, 0.1, 5, 0.37) == 0.37);
  CHECK(beta_update(0.5, x, xp, vec({3.0}), vec({3.0}), 1.0, 5) == 0.0);
}

TEST_CASE("beta update always lands in the projected range") {
  RngStream rng(2, 0);
  for (int i = 0; i < 2000; ++i) {
    const double delta = 0.01 + 0.99 * rng.uniform();
    const Vector x = rng.normal(3), xp = rng.normal(3), g = rng.normal(3), gp = rng.normal(3);
    const double b = beta_update(2.0 * rng.uniform(), x, xp, g, gp, delta, 2 + i);
    CHECK(b >= 0.0);
    CHECK(b <= (1.0 - delta) * (1.0 - delta) + 1e-15);
  }
}

TEST_CASE("nshb step examples") {
  RngStream rng(3, 0);
  const Vector x0 = rng.normal(2), s = rng.normal(2), z = rng.normal(2);
  auto st = SamplerState::start(x0);
  st.m = rng.normal(2);
  const auto next = nshb_step(st, s, 0.1, 0.3, 0.0, z);
  CHECK(next.x == langevin_step(x0, s, 0.3, z) + (std::sqrt(0.2) - std::sqrt(0.6)) * z);
  CHECK((next.x - (x0 + 0.3 * s + std::sqrt(0.2) * z)).norm() == 0.0);

  auto zero = SamplerState::start(x0);
  CHECK(nshb_step(zero, Vector::Zero(2), 0.1, 0.2, 0.4, Vector::Zero(2)).x == x0);

  auto one = SamplerState::start(vec({1.0}));
  const auto r = nshb_step(one, vec({-1.0}), 0.1, 0.225, 0.5, vec({0.0}));
  CHECK(r.m(0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(r.x(0) == doctest::Approx(0.8875).epsilon(1e-15));
  CHECK(r.x_prev(0) == 1.0);
  CHECK(r.g_prev(0) == -1.0);
  CHECK(r.t == 1);
}

TEST_CASE("nshb step at zero beta with equal steps is the langevin step") {
  RngStream rng(4, 0);
  for (int i = 0; i < 50; ++i) {
    const Vector x = rng.normal(3), s = rng.normal(3), z = rng.normal(3);
    const double a = 1e-3 + rng.uniform();
    CHECK(nshb_step(SamplerState::start(x), s, a, a, 0.0, z).x == langevin_step(x, s, a, z));
  }
}

TEST_CASE("als with one level and one inner step is a single langevin step") {
  const auto sched = NoiseSchedule::create({0.5}, 1, 0.2, 0.1);
  const auto model = make_preset("grid25");
  RngStream a(9, 0), b(9, 0);
  const Vector init = vec({0.3, -0.7});
  const auto out = als_sample(model, sched, init, a, false);
  const Vector z = b.normal(2);
  CHECK(out.x == langevin_step(init, model.score(init, 0.5), 0.2, z));
  CHECK(out.nfe == 1);
}

TEST_CASE("sampler nfe equals the number of score evaluations") {
  const auto model = make_preset("grid25");
  const auto sched = geometric_schedule(5.0, 0.05, 7, 3, 1e-4, 0.2);
  const Vector init = vec({1.0, 1.0});
  for (bool denoise : {false, true}) {
    RngStream rng(11, 0);
    RecordingScore rec(model);
    const auto als = als_sample(rec, sched, init, rng, denoise);
    CHECK(als.nfe == 7 * 3 + (denoise ? 1 : 0));
    CHECK(static_cast<std::int64_t>(rec.points.size()) == als.nfe);
    CHECK(als.diagnostics.size() == 21);

    rec.points.clear();
    const auto ams = ams_sample(rec, sched, init, rng, denoise);
    CHECK(ams.nfe == 7 * 3 + (denoise ? 1 : 0));
    CHECK(static_cast<std::int64_t>(rec.points.size()) == ams.nfe);
  }

  struct Combo {
    std::optional<PredictorKind> p;
    std::optional<CorrectorKind> c;
    Variant v;
  };
  const std::vector<Combo> combos{
      {PredictorKind::ReverseDiffusionVE, CorrectorKind::Momentum, Variant::VE},
      {PredictorKind::ReverseDiffusionVE, CorrectorKind::Langevin, Variant::VE},
      {PredictorKind::EulerMaruyamaVE, CorrectorKind::Momentum, Variant::VE},
      {PredictorKind::ReverseDiffusionVP, CorrectorKind::Momentum, Variant::VP},
      {PredictorKind::EulerMaruyamaVP, CorrectorKind::Langevin, Variant::VP},
      {PredictorKind::ReverseDiffusionVE, std::nullopt, Variant::VE},
      {PredictorKind::EulerMaruyamaVP, std::nullopt, Variant::VP},
      {std::nullopt, CorrectorKind::Momentum, Variant::VE},
      {std::nullopt, CorrectorKind::Langevin, Variant::VP},
  };
  for (const auto& combo : combos) {
    for (bool denoise : {false, true}) {
      RngStream rng(12, 0);
      RecordingScore rec(model);
      const auto out = pc_sample({combo.p, combo.c, combo.v, 0.0}, rec, sched, init, rng, denoise);
      std::int64_t expected = combo.p && combo.c ? 7 * (1 + 3) : combo.p ? 7 : 7 * 3;
      if (denoise) ++expected;
      CHECK(out.nfe == expected);
      CHECK(static_cast<std::int64_t>(rec.points.size()) == out.nfe);
    }
  }
}

TEST_CASE("pc nfe of a 50-level two-step configuration is 150") {
  const auto model = make_preset("gauss1d");
  const auto sched = geometric_schedule(50.0, 0.01, 50, 2, 0.02, 0.1);
  RngStream rng(0, 0);
  const auto out = pc_sample({PredictorKind::ReverseDiffusionVE, CorrectorKind::Momentum,
                              Variant::VE, 0.0},
                             model, sched, vec({0.0}), rng, false);
  CHECK(out.nfe == 150);
}

TEST_CASE("stationary variance of gaussian langevin matches the scalar fixed point") {
  const auto target = unit_quadratic(1);
  const double eps = 0.1;
  const auto sched = NoiseSchedule::create({0.01}, 100000, eps, 0.1);
  // Oracle: v = (1 - a)^2 v + 2 a.
  const double oracle = 2.0 / (2.0 - eps);
  double sum_sq = 0.0;
  std::int64_t count = 0;
  for (std::uint64_t chain = 0; chain < 20; ++chain) {
    RecordingScore rec(target);
    RngStream rng(31, chain);
    als_sample(rec, sched, vec({0.0}), rng, false);
    for (std::size_t t = 1000; t < rec.points.size(); ++t) {
      sum_sq += rec.points[t](0) * rec.points[t](0);
      ++count;
    }
  }
  CHECK(std::abs(sum_sq / static_cast<double>(count) / oracle - 1.0) < 0.02);
}

TEST_CASE("mean score over stationary iterates vanishes") {
  const PotentialScore target(NonQuadraticPotential::create(0.5, vec({1.0, -2.0})));
  const auto sched = NoiseSchedule::create({0.01}, 50000, 0.2, 0.1);
  const int chains = 20;
  Matrix chain_means(chains, 2);
  for (int c = 0; c < chains; ++c) {
    RecordingScore rec(target);
    RngStream rng(37, static_cast<std::uint64_t>(c));
    als_sample(rec, sched, vec({0.0, 0.0}), rng, false);
    Vector acc = Vector::Zero(2);
    for (std::size_t t = 1000; t < rec.points.size(); ++t) acc += target.score(rec.points[t], 0.0);
    chain_means.row(c) = (acc / static_cast<double>(rec.points.size() - 1000)).transpose();
  }
  const Vector mean = chain_means.colwise().mean().transpose();
  const Matrix centred = chain_means.rowwise() - mean.transpose();
  const Vector se = (centred.colwise().squaredNorm().array() / (chains - 1) / chains).sqrt();
  for (Eigen::Index j = 0; j < 2; ++j) CHECK(std::abs(mean(j)) <= 3.0 * se(j));
}

TEST_CASE("ams with delta one reproduces als bit for bit") {
  RngStream pick(41, 0);
  for (auto name : preset_names()) {
    const auto model = make_preset(name);
    for (int trial = 0; trial < 4; ++trial) {
      const int n = 2 + static_cast<int>(pick.uniform() * 10);
      const int n_sigma = 1 + static_cast<int>(pick.uniform() * 6);
      const double eps = 1e-5 * (1.0 + 20.0 * pick.uniform());
      const auto sched = geometric_schedule(10.0, 0.01, n, n_sigma, eps, 1.0);
      const Vector init = 10.0 * RngStream(42, static_cast<std::uint64_t>(trial)).normal(model.dim());
      for (bool denoise : {false, true}) {
        RngStream a(43, static_cast<std::uint64_t>(trial)), b(43, static_cast<std::uint64_t>(trial));
        const auto als = als_sample(model, sched, init, a, denoise);
        const auto ams = ams_sample(model, sched, init, b, denoise);
        CHECK(als.x == ams.x);
        CHECK(als.nfe == ams.nfe);
      }
    }
  }
}

TEST_CASE("recorded betas stay in the projected range") {
  const auto model = make_preset("grid25");
  for (double delta : {0.05, 0.1, 0.3, 0.7, 1.0}) {
    const auto sched = geometric_schedule(10.0, 0.01, 10, 8, 5e-5, delta);
    const double cap = (1.0 - delta) * (1.0 - delta);
    for (std::uint64_t chain = 0; chain < 8; ++chain) {
      RngStream rng(47, chain);
      const Vector init = 10.0 * rng.normal(2);
      const auto ams = ams_sample(model, sched, init, rng, false);
      const auto pc = pc_sample({PredictorKind::ReverseDiffusionVE, CorrectorKind::Momentum,
                                 Variant::VE, 0.0},
                                model, sched.with_epsilon(3e-5), init, rng, false);
      for (double b : ams.diagnostics.beta_trace) {
        CHECK(b >= 0.0);
        CHECK(b <= cap + 1e-15);
      }
      for (double b : pc.diagnostics.beta_trace) {
        CHECK(b >= 0.0);
        CHECK(b <= cap + 1e-15);
      }
    }
  }
}

TEST_CASE("ams momentum restarts at every level") {
  const auto model = make_preset("grid25");
  const auto sched = geometric_schedule(10.0, 0.01, 6, 5, 5e-5, 0.1);
  RngStream rng(53, 0);
  const auto out = ams_sample(model, sched, vec({3.0, -3.0}), rng, false);
  for (std::size_t i = 0; i < out.diagnostics.size(); ++i) {
    if (out.diagnostics.inner_step[i] <= 1) CHECK(out.diagnostics.beta_trace[i] == 0.0);
  }
}

TEST_CASE("noiseless momentum on a unit quadratic contracts at the spectral radius") {
  const double alpha = 0.5, delta = 0.01;
  const auto target = unit_quadratic(1);
  // Oracle: the step-by-step update with the tuned beta.
  SamplerState st = SamplerState::start(vec({1.0}));
  std::vector<double> err{1.0};
  for (int t = 0; t < 600; ++t) {
    const Vector g = target.score(st.x, 0.0);
    const double b = beta_update(alpha, st.x, st.x_prev, g, st.g_prev, delta, st.t, st.beta);
    st = nshb_step(st, g, alpha, momentum_step_size(alpha, b), b, Vector::Zero(1));
    err.push_back(std::abs(st.x(0)));
  }
  CHECK(st.beta == doctest::Approx(1.0 / 9.0).epsilon(1e-14));

  const double rho = spectral_radius(
      build_transition(Matrix::Identity(1, 1), momentum_step_size(alpha, 1.0 / 9.0), 1.0 / 9.0));
  CHECK(rho == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  double C = 0.0;
  for (int t = 0; t <= 50; ++t) C = std::max(C, err[t] / std::pow(rho, t));
  for (int t = 50; t <= 600; ++t) CHECK(err[t] <= C * std::pow(rho + 1e-3, t));
  auto window_max = [&](int lo, int hi) {
    double m = 0.0;
    for (int t = lo; t < hi; ++t) m = std::max(m, err[t]);
    return m;
  };
  const double tail_rate = std::pow(window_max(550, 600) / window_max(500, 550), 1.0 / 50.0);
  CHECK(std::abs(tail_rate - rho) < 1e-3);

  const auto sched = NoiseSchedule::create({1.0}, 600, alpha, delta);
  ZeroNoise quiet;
  const auto ams = ams_sample(target, sched, vec({1.0}), quiet, false);
  CHECK(ams.x(0) == st.x(0));
}

TEST_CASE("predictor step examples") {
  const Vector x = vec({0.7, -0.2});
  RngStream rng(59, 0);
  const Vector s = rng.normal(2), z = rng.normal(2);
  CHECK(predictor_step(PredictorKind::ReverseDiffusionVE, x, s, PredictorLevel::ve(0.3, 0.3), z) == x);
  CHECK(predictor_step(PredictorKind::ReverseDiffusionVP, x, s, PredictorLevel::vp(0.0), z) == x);
  const Vector small = predictor_step(PredictorKind::ReverseDiffusionVP, x, s, PredictorLevel::vp(1e-12), z);
  CHECK((small - x).norm() < 1e-5);
  const double gap = std::sqrt(0.5);
  CHECK(predictor_step(PredictorKind::ReverseDiffusionVE, vec({0.0}), vec({1.0}),
                       PredictorLevel::ve(gap * std::sqrt(2.0), gap), vec({0.0}))(0) ==
        doctest::Approx(0.5).epsilon(1e-14));
  const Vector rd = predictor_step(PredictorKind::ReverseDiffusionVP, x, s, PredictorLevel::vp(0.19), z);
  CHECK((rd - ((2.0 - 0.9) * x + 0.19 * s + std::sqrt(0.19) * z)).norm() < 1e-14);

  CHECK_THROWS_AS(predictor_step(PredictorKind::ReverseDiffusionVE, x, s, PredictorLevel::ve(0.2, 0.3), z),
                  ValidationError);
  CHECK_THROWS_AS(predictor_step(PredictorKind::ReverseDiffusionVP, x, s, PredictorLevel::vp(1.0), z),
                  ValidationError);
  CHECK_THROWS_AS(predictor_step(PredictorKind::EulerMaruyamaVP, x, s, PredictorLevel::vp(-0.1), z),
                  ValidationError);
}

TEST_CASE("langevin corrector equals momentum corrector at delta one") {
  const auto model = make_preset("grid25");
  RngStream init_rng(61, 0);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = SamplerState::start(3.0 * init_rng.normal(2));
    auto b = a;
    RngStream ra(62, static_cast<std::uint64_t>(trial)), rb(62, static_cast<std::uint64_t>(trial));
    const CorrectorParams mc{0.05, 1.0, Variant::VE, 0.0};
    const CorrectorParams lc{0.05, 0.1, Variant::VE, 0.0};
    for (int k = 0; k < 10; ++k) {
      a = corrector_step(CorrectorKind::Momentum, a, model, Perturbation::ve(0.5), mc, ra);
      b = corrector_step(CorrectorKind::Langevin, b, model, Perturbation::ve(0.5), lc, rb);
      CHECK(a.x == b.x);
      CHECK(b.beta == 0.0);
    }
  }
}

TEST_CASE("momentum corrector on a flat score moves by noise only") {
  const ZeroScore flat(2);
  auto st = SamplerState::start(vec({1.0, 2.0}));
  RecordingNoise noise(RngStream(67, 0));
  const CorrectorParams p{0.2, 0.1, Variant::VE, 0.0};
  const auto next = corrector_step(CorrectorKind::Momentum, st, flat, Perturbation::ve(1.0), p, noise);
  REQUIRE(noise.draws.size() == 1);
  const Vector moved = next.x - st.x;
  const Vector z = noise.draws[0];
  CHECK(std::abs(moved.dot(z) / (moved.norm() * z.norm()) - 1.0) < 1e-14);
  CHECK(next.nfe == 1);
}

TEST_CASE("momentum corrector uses the signal-to-noise step of the current momentum") {
  const auto model = make_preset("grid25");
  RecordingNoise noise(RngStream(71, 0));
  auto st = SamplerState::start(vec({2.5, -1.0}));
  const CorrectorParams p{0.16, 0.1, Variant::VE, 0.0};
  for (int k = 0; k < 6; ++k) {
    const auto prev = st;
    st = corrector_step(CorrectorKind::Momentum, st, model, Perturbation::ve(0.3), p, noise);
    const Vector g = model.score(prev.x, 0.3);
    const Vector m = st.beta * prev.m + (1.0 - st.beta) * g;
    const double expected = snr_step_size(0.16, st.beta, m.norm(), noise.draws.back().norm(),
                                          Variant::VE, 0.16);
    CHECK(st.alpha == doctest::Approx(expected).epsilon(1e-14));
    CHECK(st.alpha_tilde == st.alpha);
  }
}

TEST_CASE("corrector rejects a degenerate noise source") {
  ZeroNoise quiet;
  const auto model = make_preset("gauss1d");
  const CorrectorParams p{0.2, 0.1, Variant::VE, 0.0};
  CHECK_THROWS_AS(corrector_step(CorrectorKind::Momentum, SamplerState::start(vec({1.0})), model,
                                 Perturbation::ve(1.0), p, quiet),
                  NumericalError);
}

TEST_CASE("pc sampling is deterministic for a fixed stream") {
  const auto model = make_preset("swissroll-mixture");
  const auto sched = geometric_schedule(20.0, 0.01, 20, 2, 3e-5, 0.2);
  const PcSpec spec{PredictorKind::ReverseDiffusionVE, CorrectorKind::Momentum, Variant::VE, 0.0};
  RngStream a(73, 5), b(73, 5);
  const Vector init = vec({1.0, 1.0});
  CHECK(pc_sample(spec, model, sched, init, a, true).x == pc_sample(spec, model, sched, init, b, true).x);
  const PcSpec wrong{PredictorKind::ReverseDiffusionVP, std::nullopt, Variant::VE, 0.0};
  CHECK_THROWS_AS(pc_sample(wrong, model, sched, init, a, false), ValidationError);
  CHECK_THROWS_AS(pc_sample({std::nullopt, std::nullopt, Variant::VE, 0.0}, model, sched, init, a, false),
                  ValidationError);
}

TEST_CASE("tweedie denoise examples") {
  CHECK(tweedie_denoise(vec({1.5}), vec({0.0}), 0.3) == vec({1.5}));
  const auto g = GaussianMixture::create({1.0}, Matrix::Zero(1, 1), {1.0});
  const Vector x = vec({2.0});
  // Conjugate posterior mean x v / (v + sigma^2).
  CHECK(tweedie_denoise(x, perturbed_score(g, x, 1.0), 1.0)(0) == doctest::Approx(1.0).epsilon(1e-15));
  double previous = INFINITY;
  for (double sigma : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double gap = std::abs(tweedie_denoise(x, perturbed_score(g, x, sigma), sigma)(0) - 2.0);
    CHECK(gap < previous);
    previous = gap;
  }
  CHECK(previous < 1e-7);
  CHECK_THROWS_AS(tweedie_denoise(x, x, 0.0), ValidationError);
}
