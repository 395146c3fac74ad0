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

// Command-line front end: sample, compare, sweep, markov-check.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "amsample/config.hpp"
#include "amsample/harness.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

void print_metrics(const amsample::ExperimentOutcome& o) {
  for (const auto& m : o.metrics) {
    std::cout << m.metric << " " << amsample::format_double(m.value) << "\n";
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw amsample::ValidationError("output: cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score-based sampling with adaptive momentum"};
  app.require_subcommand(1);

  std::string sample_config;
  auto* sample = app.add_subcommand("sample", "Run one configuration and write CSV artifacts");
  sample->add_option("--config", sample_config, "Configuration file")->required();

  std::vector<std::string> compare_configs;
  std::vector<std::uint64_t> compare_seeds;
  std::string compare_output;
  auto* compare = app.add_subcommand("compare", "Compare configurations across seeds");
  compare->add_option("--config", compare_configs, "Configuration file (repeatable)")->required();
  compare->add_option("--seeds", compare_seeds, "Comma-separated master seeds")
      ->required()
      ->delimiter(',');
  compare->add_option("--output", compare_output, "Also write the table to this CSV file");

  std::string sweep_config, sweep_param;
  std::vector<double> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "Sweep one hyperparameter and flag the best value");
  sweep->add_option("--config", sweep_config, "Base configuration file")->required();
  sweep->add_option("--param", sweep_param, "Parameter to vary")
      ->required()
      ->check(CLI::IsMember({"epsilon", "n_sigma", "delta"}));
  sweep->add_option("--values", sweep_values, "Comma-separated values")
      ->required()
      ->delimiter(',');

  amsample::MarkovCheckOptions markov;
  std::vector<double> alpha_grid;
  auto* markov_cmd = app.add_subcommand("markov-check", "Check spectral bound, Lyapunov solve and bias slope");
  markov_cmd->add_option("--alpha-grid", alpha_grid, "Comma-separated step sizes")
      ->delimiter(',');
  markov_cmd->add_option("--dim", markov.dim, "Dimension of the random quadratics")
      ->check(CLI::PositiveNumber);
  markov_cmd->add_option("--matrices", markov.matrices, "Number of random SPD matrices")
      ->check(CLI::PositiveNumber);
  markov_cmd->add_option("--seed", markov.seed, "Master seed");
  markov_cmd->add_option("--bias-chain-length", markov.bias_chain_length,
                         "Steps per replica in the bias experiment")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*sample) {
      const auto config = amsample::load_config(sample_config);
      const auto outcome = amsample::evaluate_experiment(config);
      const auto paths = amsample::write_artifacts(outcome);
      std::cout << "samples " << paths.samples_path.string() << "\n"
                << "metrics " << paths.metrics_path.string() << "\n"
                << "diagnostics " << paths.diagnostics_path.string() << "\n"
                << "nfe " << outcome.nfe << "\n";
      print_metrics(outcome);
    } else if (*compare) {
      std::vector<amsample::ExperimentConfig> configs;
      for (const auto& path : compare_configs) configs.push_back(amsample::load_config(path));
      const std::string table =
          amsample::format_comparison(amsample::compare_samplers(configs, compare_seeds));
      std::cout << table;
      if (!compare_output.empty()) write_text(compare_output, table);
    } else if (*sweep) {
      const auto base = amsample::load_config(sweep_config);
      const auto result = amsample::sweep(base, sweep_param, sweep_values, 0, true);
      std::cout << amsample::format_sweep(result);
    } else if (*markov_cmd) {
      if (!alpha_grid.empty()) markov.alpha_grid = alpha_grid;
      std::cout << amsample::format_markov_check(amsample::markov_check(markov));
    }
  } catch (const amsample::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const amsample::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
