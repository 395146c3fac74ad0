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

#include "amsample/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "amsample/markov_analysis.hpp"
#include "amsample/metrics.hpp"
#include "amsample/score_models.hpp"

#ifndef AMSAMPLE_VERSION
#define AMSAMPLE_VERSION "unknown"
#endif

namespace amsample {

namespace {

// A chain whose final sample leaves this ball counts as diverged.
constexpr double kDivergenceRadius = 1e6;


using Clock = std::chrono::steady_clock;

double elapsed_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double find_metric(const std::vector<MetricRecord>& metrics, const std::string& name) {
  for (const auto& m : metrics)
    if (m.metric == name) return m.value;
  throw ValidationError("metric: no record named '" + name + "'");
}

bool is_pc(SamplerKind kind) {
  return kind != SamplerKind::ALS && kind != SamplerKind::AMS;
}

PcSpec pc_spec(const ExperimentConfig& config) {
  PcSpec spec;
  spec.variant = config.variant;
  spec.epsilon0 = config.epsilon0;
  const bool ve = config.variant == Variant::VE;
  const PredictorKind rd = ve ? PredictorKind::ReverseDiffusionVE : PredictorKind::ReverseDiffusionVP;
  const PredictorKind em = ve ? PredictorKind::EulerMaruyamaVE : PredictorKind::EulerMaruyamaVP;
  switch (config.sampler) {
    case SamplerKind::MCOnly: spec.corrector = CorrectorKind::Momentum; break;
    case SamplerKind::LCOnly: spec.corrector = CorrectorKind::Langevin; break;
    case SamplerKind::RDMC: spec.predictor = rd; spec.corrector = CorrectorKind::Momentum; break;
    case SamplerKind::RDLC: spec.predictor = rd; spec.corrector = CorrectorKind::Langevin; break;
    case SamplerKind::EMMC: spec.predictor = em; spec.corrector = CorrectorKind::Momentum; break;
    case SamplerKind::EMLC: spec.predictor = em; spec.corrector = CorrectorKind::Langevin; break;
    case SamplerKind::RD: spec.predictor = rd; break;
    case SamplerKind::EM: spec.predictor = em; break;
    default: break;
  }
  return spec;
}

// Standard deviation of the isotropic Gaussian each chain starts from.
double init_scale(const ExperimentConfig& config, const NoiseSchedule& schedule) {
  if (config.variant == Variant::VP) return 1.0;
  if (is_pc(config.sampler) && pc_spec(config).predictor) return pc_prior_sigma(schedule);
  return schedule.sigma_max();
}

SampleResult run_chain(const ExperimentConfig& config, const NoiseSchedule& schedule,
                       const GaussianMixture& model, std::uint64_t chain) {
  RngStream rng(config.master_seed, chain);
  const Vector init = init_scale(config, schedule) * rng.normal(model.dim());
  switch (config.sampler) {
    case SamplerKind::ALS:
      return als_sample(model, schedule, init, rng, config.denoise);
    case SamplerKind::AMS:
      return ams_sample(model, schedule, init, rng, config.denoise,
                        AmsOptions{config.alpha_tilde_mode});
    default:
      return pc_sample(pc_spec(config), model, schedule, init, rng, config.denoise);
  }
}

std::vector<MetricRecord> score_cloud(const ExperimentConfig& config,
                                      const GaussianMixture& model, const Matrix& samples) {
  const PointCloud X(samples);
  RngStream ref_rng(config.master_seed, RngStream::kReferenceStream);
  const PointCloud Y(model.sample(static_cast<std::size_t>(config.chains), ref_rng));
  RngStream proj_rng(config.master_seed, RngStream::kProjectionStream);

  std::vector<MetricRecord> out;
  out.push_back({"sliced_w2", sliced_w2(X, Y, config.n_projections, proj_rng)});
  const Eigen::Index exact_n = std::min<Eigen::Index>(X.n(), config.exact_w2_max);
  if (exact_n >= 1) out.push_back({"exact_w2", exact_w2(X.head(exact_n), Y.head(exact_n))});
  const Eigen::Index mmd_n = std::min<Eigen::Index>(X.n(), config.mmd_max);
  if (mmd_n >= 1) {
    const PointCloud Xm = X.head(mmd_n), Ym = Y.head(mmd_n);
    const double h = median_heuristic_bandwidth(Xm, Ym);
    out.push_back({"mmd", rbf_mmd(Xm, Ym, h)});
    out.push_back({"mmd_bandwidth", h});
  }
  out.push_back({"mean_error", (X.points().colwise().mean().transpose() - model.mean()).norm()});
  if (X.n() >= 2) {
    out.push_back({"cov_error", (moments(X).covariance - model.covariance()).norm()});
  }
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("output_dir: cannot write '" + path.string() + "'");
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

double ExperimentOutcome::metric(const std::string& name) const {
  return find_metric(metrics, name);
}

double ComparisonRow::metric(const std::string& name) const {
  return find_metric(metrics, name);
}

int default_worker_count() {
  if (const char* env = std::getenv("AMSAMPLE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    throw ValidationError("AMSAMPLE_WORKERS: expected an integer in [1, 1024]");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string code_version() { return std::string("amsample-") + AMSAMPLE_VERSION; }

ExperimentOutcome evaluate_experiment(const ExperimentConfig& config, int workers) {
  config.validate();
  const GaussianMixture model = make_preset(config.model_name);
  const NoiseSchedule schedule = config.schedule();
  const int chains = config.chains;
  const int keep_diag = config.diagnostics_chains < 0
                            ? chains
                            : std::min(chains, config.diagnostics_chains);
  if (workers <= 0) workers = default_worker_count();
  workers = std::min(workers, chains);

  ExperimentOutcome outcome;
  outcome.config = config;
  outcome.samples.resize(chains, model.dim());
  outcome.diagnostics.resize(static_cast<std::size_t>(keep_diag));
  std::vector<std::int64_t> nfe(static_cast<std::size_t>(chains), 0);

  // Each chain writes only its own row, so results land in chain order no
  // matter which worker ran it. The first failure by chain index wins.
  std::atomic<int> next{0};
  std::mutex error_mutex;
  int error_chain = chains;
  std::exception_ptr error;
  auto work = [&] {
    for (int k = next.fetch_add(1); k < chains; k = next.fetch_add(1)) {
      try {
        SampleResult r = run_chain(config, schedule, model, static_cast<std::uint64_t>(k));
        if (!r.x.allFinite() || r.x.norm() > kDivergenceRadius) {
          throw NumericalError("sampler: chain " + std::to_string(k) +
                               " diverged (epsilon too large?)");
        }
        outcome.samples.row(k) = r.x.transpose();
        nfe[static_cast<std::size_t>(k)] = r.nfe;
        if (k < keep_diag) outcome.diagnostics[static_cast<std::size_t>(k)] = std::move(r.diagnostics);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (k < error_chain) {
          error_chain = k;
          error = std::current_exception();
        }
      }
    }
  };

  const auto start = Clock::now();
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  outcome.elapsed_ms = elapsed_since(start);
  if (error) std::rethrow_exception(error);

  outcome.nfe = nfe.front();
  for (std::int64_t v : nfe) {
    if (v != outcome.nfe) throw NumericalError("sampler: chains disagree on NFE");
  }
  outcome.metrics = score_cloud(config, model, outcome.samples);
  return outcome;
}

RunArtifacts write_artifacts(const ExperimentOutcome& outcome) {
  const ExperimentConfig& config = outcome.config;
  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw ValidationError("output_dir: cannot create '" + dir.string() + "': " + ec.message());
  }
  RunArtifacts paths{dir / "samples.csv", dir / "metrics.csv", dir / "diagnostics.csv"};

  {
    std::ofstream out = open_output(paths.samples_path);
    out << "chain";
    for (Eigen::Index j = 0; j < outcome.samples.cols(); ++j) out << ",dim" << j;
    out << '\n';
    for (Eigen::Index i = 0; i < outcome.samples.rows(); ++i) {
      out << i;
      for (Eigen::Index j = 0; j < outcome.samples.cols(); ++j) {
        out << ',' << format_double(outcome.samples(i, j));
      }
      out << '\n';
    }
  }
  {
    std::ofstream out = open_output(paths.metrics_path);
    out << "sampler,variant,nfe,seed,metric,value,elapsed_ms,config_hash,code_version\n";
    const std::string elapsed = config.record_timing ? format_double(outcome.elapsed_ms) : "0";
    const std::string hash = hex64(config.hash());
    for (const auto& m : outcome.metrics) {
      out << sampler_label(config.sampler) << ',' << variant_label(config.variant) << ','
          << outcome.nfe << ',' << config.master_seed << ',' << m.metric << ','
          << format_double(m.value) << ',' << elapsed << ',' << hash << ','
          << code_version() << '\n';
    }
  }
  {
    std::ofstream out = open_output(paths.diagnostics_path);
    out << "chain,level,inner_step,beta,alpha_tilde,score_norm\n";
    for (std::size_t k = 0; k < outcome.diagnostics.size(); ++k) {
      const Diagnostics& d = outcome.diagnostics[k];
      for (std::size_t s = 0; s < d.size(); ++s) {
        out << k << ',' << d.level[s] << ',' << d.inner_step[s] << ','
            << format_double(d.beta_trace[s]) << ',' << format_double(d.step_trace[s]) << ','
            << format_double(d.score_norm_trace[s]) << '\n';
      }
    }
  }
  return paths;
}

RunArtifacts run_experiment(const ExperimentConfig& config, int workers) {
  return write_artifacts(evaluate_experiment(config, workers));
}

std::vector<ComparisonRow> compare_samplers(const std::vector<ExperimentConfig>& configs,
                                            const std::vector<std::uint64_t>& seeds,
                                            int workers) {
  require(!configs.empty(), "configs: need at least one configuration");
  require(!seeds.empty(), "seeds: need at least one seed");
  for (const auto& c : configs) {
    if (c.model_name != configs.front().model_name) {
      throw ValidationError("model_name: compared configs must share one model ('" +
                            configs.front().model_name + "' vs '" + c.model_name + "')");
    }
  }
  std::vector<ComparisonRow> rows;
  for (const auto& base : configs) {
    for (std::uint64_t seed : seeds) {
      ExperimentConfig c = base;
      c.master_seed = seed;
      const ExperimentOutcome o = evaluate_experiment(c, workers);
      rows.push_back({std::string(sampler_label(c.sampler)), std::string(variant_label(c.variant)),
                      o.nfe, seed, o.metrics, o.elapsed_ms});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    return std::tie(a.sampler, a.variant, a.nfe, a.seed) <
           std::tie(b.sampler, b.variant, b.nfe, b.seed);
  });
  return rows;
}

std::string format_comparison(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "sampler,variant,nfe,seed";
  if (!rows.empty())
    for (const auto& m : rows.front().metrics) out << ',' << m.metric;
  out << ",elapsed_ms\n";
  for (const auto& r : rows) {
    out << r.sampler << ',' << r.variant << ',' << r.nfe << ',' << r.seed;
    for (const auto& m : r.metrics) out << ',' << format_double(m.value);
    out << ',' << format_double(r.elapsed_ms) << '\n';
  }
  return out.str();
}

SweepResult sweep(const ExperimentConfig& base, const std::string& parameter,
                  const std::vector<double>& values, int workers, bool write_files,
                  const std::string& primary_metric) {
  require(parameter == "epsilon" || parameter == "n_sigma" || parameter == "delta",
          "param: must be one of epsilon, n_sigma, delta");
  require(!values.empty(), "values: sweep needs at least one value");

  // Validate every value before any run starts.
  std::vector<ExperimentConfig> configs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig c = base;
    const double v = values[i];
    if (parameter == "n_sigma") {
      require(std::isfinite(v) && v == std::floor(v), "n_sigma: sweep values must be integers");
      set_config_value(c, parameter, std::to_string(static_cast<long long>(v)));
    } else {
      set_config_value(c, parameter, format_double(v));
    }
    if (write_files) {
      c.output_dir = (std::filesystem::path(base.output_dir) /
                      (parameter + "_" + std::to_string(i))).string();
    }
    c.validate();
    configs.push_back(std::move(c));
  }

  SweepResult result;
  result.parameter = parameter;
  result.primary_metric = primary_metric;
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    SweepRow row;
    row.value = values[i];
    try {
      const ExperimentOutcome o = evaluate_experiment(configs[i], workers);
      if (write_files) write_artifacts(o);
      row.metrics = o.metrics;
      const double score = find_metric(row.metrics, primary_metric);
      if (!found || score < best) {
        best = score;
        result.best_index = i;
        found = true;
      }
    } catch (const NumericalError&) {
      row.diverged = true;
    }
    result.rows.push_back(std::move(row));
  }
  if (!found) throw NumericalError("sweep: every value diverged");
  result.rows[result.best_index].best = true;
  return result;
}

std::string format_sweep(const SweepResult& result) {
  std::ostringstream out;
  out << result.parameter << ',' << result.primary_metric << ",status,best\n";
  for (const auto& r : result.rows) {
    out << format_double(r.value) << ',';
    if (r.diverged) {
      out << "nan,diverged,";
    } else {
      out << format_double(find_metric(r.metrics, result.primary_metric)) << ",ok,";
    }
    out << (r.best ? "*" : "") << '\n';
  }
  return out.str();
}

MarkovCheckReport markov_check(const MarkovCheckOptions& options) {
  require(!options.alpha_grid.empty(), "alpha-grid: need at least one step size");
  require(options.dim >= 1, "dim: must be >= 1");
  require(options.matrices >= 1, "matrices: must be >= 1");
  for (double a : options.alpha_grid) require(a > 0.0, "alpha-grid: step sizes must be > 0");

  MarkovCheckReport report;
  RngStream rng(options.seed, 0);
  for (int k = 0; k < options.matrices; ++k) {
    const Matrix A = random_spd(options.dim, 0.5, 5.0, rng);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(A);
    const double mu = eig.eigenvalues().minCoeff(), L = eig.eigenvalues().maxCoeff();
    for (double alpha : options.alpha_grid) {
      if (alpha * mu >= 1.0 || alpha * L >= 2.0) continue;
      const TransitionMatrix T = build_transition(A, alpha, tuned_beta(alpha, mu));
      const double excess = spectral_radius(T) - rate_bound(alpha, mu);
      ++report.spectral_checks;
      report.worst_excess = report.spectral_checks == 1 ? excess : std::max(report.worst_excess, excess);
      if (excess > 1e-9) ++report.bound_violations;
      if (spectral_radius(T) < 1.0) {
        const Matrix Q = sampler_noise_covariance(options.dim, alpha);
        const Matrix S = stationary_covariance(T, Q);
        report.max_lyapunov_residual =
            std::max(report.max_lyapunov_residual, lyapunov_residual(T.T, S, Q));
        ++report.lyapunov_solves;
      }
    }
  }

  const NonQuadraticPotential f = NonQuadraticPotential::create(1.0, Vector::Ones(options.dim));
  BiasScalingOptions bias;
  for (double a : options.alpha_grid)
    if (a * f.L() < 2.0) bias.alphas.push_back(a);
  if (bias.alphas.size() >= 2) {
    bias.gradient_noise = 2.0;
    bias.chain_length = options.bias_chain_length;
    bias.burn_in = std::min<std::int64_t>(10'000, options.bias_chain_length / 10);
    bias.replicas = options.bias_replicas;
    RngStream bias_rng(options.seed, 1);
    const BiasScalingResult r = bias_scaling_experiment(f, bias, bias_rng);
    report.bias_slope = r.slope;
    report.bias_points = r.points;
  } else {
    report.bias_slope = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

std::string format_markov_check(const MarkovCheckReport& r) {
  std::ostringstream out;
  out << "spectral_checks " << r.spectral_checks << '\n'
      << "bound_violations " << r.bound_violations << '\n'
      << "worst_excess " << format_double(r.worst_excess) << '\n'
      << "lyapunov_solves " << r.lyapunov_solves << '\n'
      << "max_lyapunov_residual " << format_double(r.max_lyapunov_residual) << '\n'
      << "bias_slope " << format_double(r.bias_slope) << '\n';
  for (const auto& p : r.bias_points) {
    out << "bias alpha=" << format_double(p.alpha) << " norm=" << format_double(p.bias_norm)
        << (p.diverged ? " diverged" : "") << '\n';
  }
  return out.str();
}

}  // namespace amsample
