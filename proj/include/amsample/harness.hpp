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

#ifndef AMSAMPLE_HARNESS_HPP
#define AMSAMPLE_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "amsample/config.hpp"
#include "amsample/core.hpp"
#include "amsample/markov_analysis.hpp"
#include "amsample/samplers.hpp"

namespace amsample {

struct MetricRecord {
  std::string metric;
  double value = 0.0;
};

/// In-memory result of one configuration.
struct ExperimentOutcome {
  ExperimentConfig config;
  Matrix samples;                        ///< chains x d, chain-index order
  std::vector<Diagnostics> diagnostics;  ///< first diagnostics_chains chains
  std::vector<MetricRecord> metrics;
  std::int64_t nfe = 0;                  ///< per chain, as counted by the sampler
  double elapsed_ms = 0.0;               ///< wall-clock of the sampling phase

  double metric(const std::string& name) const;
};

struct RunArtifacts {
  std::filesystem::path samples_path;
  std::filesystem::path metrics_path;
  std::filesystem::path diagnostics_path;
};

/// Worker threads from AMSAMPLE_WORKERS, else hardware concurrency.
int default_worker_count();
std::string code_version();

/// Draws and scores all chains of `config`. Output does not depend on
/// `workers`.
ExperimentOutcome evaluate_experiment(const ExperimentConfig& config, int workers = 0);

RunArtifacts write_artifacts(const ExperimentOutcome& outcome);

/// evaluate_experiment followed by write_artifacts into config.output_dir.
RunArtifacts run_experiment(const ExperimentConfig& config, int workers = 0);

struct ComparisonRow {
  std::string sampler;
  std::string variant;
  std::int64_t nfe = 0;
  std::uint64_t seed = 0;
  std::vector<MetricRecord> metrics;
  double elapsed_ms = 0.0;

  double metric(const std::string& name) const;
};

/// Every config under every seed; rows sorted by (sampler, variant, NFE,
/// seed). All configs must name the same model.
std::vector<ComparisonRow> compare_samplers(const std::vector<ExperimentConfig>& configs,
                                            const std::vector<std::uint64_t>& seeds,
                                            int workers = 0);
std::string format_comparison(const std::vector<ComparisonRow>& rows);

struct SweepRow {
  double value = 0.0;
  std::vector<MetricRecord> metrics;
  bool diverged = false;
  bool best = false;
};

struct SweepResult {
  std::string parameter;
  std::string primary_metric;
  std::vector<SweepRow> rows;
  std::size_t best_index = 0;
};

/// One experiment per value of `parameter` (epsilon, n_sigma or delta). A
/// run that produces non-finite samples is kept as a diverged row. The row
/// with the smallest primary metric is flagged; ties keep the first.
/// With `write_files` each run's artifacts go to output_dir/<parameter>_<index>.
SweepResult sweep(const ExperimentConfig& base, const std::string& parameter,
                  const std::vector<double>& values, int workers = 0,
                  bool write_files = false,
                  const std::string& primary_metric = "sliced_w2");
std::string format_sweep(const SweepResult& result);

struct MarkovCheckOptions {
  std::vector<double> alpha_grid{0.02, 0.04, 0.08, 0.16};
  Eigen::Index dim = 2;
  int matrices = 200;
  std::uint64_t seed = 0;
  std::int64_t bias_chain_length = 200'000;
  int bias_replicas = 4;
};

struct MarkovCheckReport {
  int spectral_checks = 0;
  int bound_violations = 0;
  double worst_excess = 0.0;  ///< max of rho - bound over all checks
  int lyapunov_solves = 0;
  double max_lyapunov_residual = 0.0;
  double bias_slope = 0.0;
  std::vector<BiasPoint> bias_points;
};

/// Spectral-bound check on random SPD matrices of size `dim` at every grid
/// step that satisfies alpha mu < 1, stationary-covariance residuals at the
/// tuned beta, and the bias slope of the log cosh potential over the grid.
MarkovCheckReport markov_check(const MarkovCheckOptions& options);
std::string format_markov_check(const MarkovCheckReport& report);

}  // namespace amsample

#endif  // AMSAMPLE_HARNESS_HPP
