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

#ifndef AMSAMPLE_CONFIG_HPP
#define AMSAMPLE_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "amsample/samplers.hpp"
#include "amsample/schedules.hpp"

namespace amsample {

enum class SamplerKind { ALS, AMS, MCOnly, LCOnly, RDMC, RDLC, EMMC, EMLC, RD, EM };

std::string_view sampler_label(SamplerKind kind);
SamplerKind parse_sampler(std::string_view label);
std::string_view variant_label(Variant variant);

/// Complete description of one sampling run. Together with master_seed it
/// determines every output byte.
///
/// Text form: one `key = value` per line, `#` starts a comment. Keys are the
/// field names below.
struct ExperimentConfig {
  std::string model_name = "grid25";
  SamplerKind sampler = SamplerKind::AMS;
  Variant variant = Variant::VE;
  double sigma_max = 10.0;
  double sigma_min = 0.01;
  int n = 20;
  int n_sigma = 5;
  double epsilon = 5e-5;
  double delta = 0.1;
  double epsilon0 = 0.0;  ///< VP corrector; 0 means "same as epsilon"
  int chains = 1024;
  std::uint64_t master_seed = 0;
  bool denoise = false;
  std::string output_dir = "amsample_out";

  AlphaTildeMode alpha_tilde_mode = AlphaTildeMode::PerStep;
  int n_projections = 128;
  int exact_w2_max = 512;  ///< exact W2 uses the first min(chains, this) samples
  int mmd_max = 1024;      ///< likewise for MMD
  int diagnostics_chains = -1;  ///< chains written to diagnostics.csv; -1 = all
  bool record_timing = false;   ///< write wall-clock into metrics.csv

  /// Score evaluations per chain implied by the sampler and schedule.
  std::int64_t nfe() const;
  NoiseSchedule schedule() const;
  /// Throws ValidationError naming the first offending field.
  void validate() const;
  /// Sorted `key = value` lines, excluding output_dir.
  std::string canonical() const;
  /// FNV-1a hash of canonical().
  std::uint64_t hash() const;
};

/// Sets one field from its text form. Throws ValidationError on unknown keys
/// or malformed values.
void set_config_value(ExperimentConfig& config, std::string_view key,
                      std::string_view value);

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Shortest text that round-trips a double (17 significant digits).
std::string format_double(double value);

}  // namespace amsample

#endif  // AMSAMPLE_CONFIG_HPP
