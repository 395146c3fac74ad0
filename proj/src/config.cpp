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

#include "amsample/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "amsample/score_models.hpp"

namespace amsample {

namespace {

constexpr std::array<std::pair<SamplerKind, std::string_view>, 10> kSamplerLabels{{
    {SamplerKind::ALS, "ALS"},
    {SamplerKind::AMS, "AMS"},
    {SamplerKind::MCOnly, "MC-only"},
    {SamplerKind::LCOnly, "LC-only"},
    {SamplerKind::RDMC, "RD-MC"},
    {SamplerKind::RDLC, "RD-LC"},
    {SamplerKind::EMMC, "EM-MC"},
    {SamplerKind::EMLC, "EM-LC"},
    {SamplerKind::RD, "RD"},
    {SamplerKind::EM, "EM"},
}};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string field_error(std::string_view key, std::string_view value,
                        std::string_view expected) {
  return std::string(key) + ": cannot parse '" + std::string(value) + "' as " +
         std::string(expected);
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ValidationError(field_error(key, value, "a real number"));
  }
  return out;
}

template <class Int>
Int parse_integer(std::string_view key, std::string_view value) {
  Int out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError(field_error(key, value, "an integer"));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValidationError(field_error(key, value, "a boolean"));
}

}  // namespace

std::string_view sampler_label(SamplerKind kind) {
  for (const auto& [k, label] : kSamplerLabels)
    if (k == kind) return label;
  return "?";
}

SamplerKind parse_sampler(std::string_view label) {
  for (const auto& [k, name] : kSamplerLabels)
    if (name == label) return k;
  throw ValidationError("sampler: unknown sampler '" + std::string(label) + "'");
}

std::string_view variant_label(Variant variant) {
  return variant == Variant::VE ? "VE" : "VP";
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::int64_t ExperimentConfig::nfe() const {
  const std::int64_t levels = n, inner = n_sigma;
  std::int64_t per_chain = 0;
  switch (sampler) {
    case SamplerKind::ALS:
    case SamplerKind::AMS:
    case SamplerKind::MCOnly:
    case SamplerKind::LCOnly:
      per_chain = levels * inner;
      break;
    case SamplerKind::RDMC:
    case SamplerKind::RDLC:
    case SamplerKind::EMMC:
    case SamplerKind::EMLC:
      per_chain = levels * (1 + inner);
      break;
    case SamplerKind::RD:
    case SamplerKind::EM:
      per_chain = levels;
      break;
  }
  return per_chain + (denoise ? 1 : 0);
}

NoiseSchedule ExperimentConfig::schedule() const {
  return geometric_schedule(sigma_max, sigma_min, n, n_sigma, epsilon, delta);
}

void ExperimentConfig::validate() const {
  make_preset(model_name);
  require(chains >= 1, "chains: must be >= 1");
  require(n >= 2, "n: must be >= 2");
  require(n_sigma >= 1, "n_sigma: must be >= 1");
  require(sigma_min > 0.0, "sigma_min: must be > 0");
  require(sigma_max > sigma_min, "sigma_max: must exceed sigma_min");
  require(epsilon > 0.0, "epsilon: must be > 0");
  require(delta > 0.0 && delta <= 1.0, "delta: must lie in (0, 1]");
  require(epsilon0 >= 0.0, "epsilon0: must be >= 0");
  require(n_projections >= 1, "n_projections: must be >= 1");
  require(exact_w2_max >= 0 && exact_w2_max <= 2048, "exact_w2_max: must lie in [0, 2048]");
  require(mmd_max >= 0, "mmd_max: must be >= 0");
  require(diagnostics_chains >= -1, "diagnostics_chains: must be >= -1");
  if (sampler == SamplerKind::ALS || sampler == SamplerKind::AMS) {
    require(variant == Variant::VE, "variant: ALS and AMS run on VE noise levels only");
  }
}

std::string ExperimentConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["model_name"] = model_name;
  kv["sampler"] = std::string(sampler_label(sampler));
  kv["variant"] = std::string(variant_label(variant));
  kv["sigma_max"] = format_double(sigma_max);
  kv["sigma_min"] = format_double(sigma_min);
  kv["n"] = std::to_string(n);
  kv["n_sigma"] = std::to_string(n_sigma);
  kv["epsilon"] = format_double(epsilon);
  kv["delta"] = format_double(delta);
  kv["epsilon0"] = format_double(epsilon0);
  kv["chains"] = std::to_string(chains);
  kv["master_seed"] = std::to_string(master_seed);
  kv["denoise"] = denoise ? "true" : "false";
  kv["alpha_tilde_mode"] = alpha_tilde_mode == AlphaTildeMode::PerStep ? "per_step" : "per_level";
  kv["n_projections"] = std::to_string(n_projections);
  kv["exact_w2_max"] = std::to_string(exact_w2_max);
  kv["mmd_max"] = std::to_string(mmd_max);
  kv["diagnostics_chains"] = std::to_string(diagnostics_chains);
  kv["record_timing"] = record_timing ? "true" : "false";
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void set_config_value(ExperimentConfig& c, std::string_view key, std::string_view value) {
  if (key == "model_name") c.model_name = std::string(value);
  else if (key == "sampler") c.sampler = parse_sampler(value);
  else if (key == "variant") {
    if (value == "VE") c.variant = Variant::VE;
    else if (value == "VP") c.variant = Variant::VP;
    else throw ValidationError(field_error(key, value, "VE or VP"));
  }
  else if (key == "sigma_max") c.sigma_max = parse_real(key, value);
  else if (key == "sigma_min") c.sigma_min = parse_real(key, value);
  else if (key == "n") c.n = parse_integer<int>(key, value);
  else if (key == "n_sigma") c.n_sigma = parse_integer<int>(key, value);
  else if (key == "epsilon") c.epsilon = parse_real(key, value);
  else if (key == "delta") c.delta = parse_real(key, value);
  else if (key == "epsilon0") c.epsilon0 = parse_real(key, value);
  else if (key == "chains") c.chains = parse_integer<int>(key, value);
  else if (key == "master_seed") c.master_seed = parse_integer<std::uint64_t>(key, value);
  else if (key == "denoise") c.denoise = parse_bool(key, value);
  else if (key == "output_dir") c.output_dir = std::string(value);
  else if (key == "alpha_tilde_mode") {
    if (value == "per_step") c.alpha_tilde_mode = AlphaTildeMode::PerStep;
    else if (value == "per_level") c.alpha_tilde_mode = AlphaTildeMode::PerLevel;
    else throw ValidationError(field_error(key, value, "per_step or per_level"));
  }
  else if (key == "n_projections") c.n_projections = parse_integer<int>(key, value);
  else if (key == "exact_w2_max") c.exact_w2_max = parse_integer<int>(key, value);
  else if (key == "mmd_max") c.mmd_max = parse_integer<int>(key, value);
  else if (key == "diagnostics_chains") c.diagnostics_chains = parse_integer<int>(key, value);
  else if (key == "record_timing") c.record_timing = parse_bool(key, value);
  else throw ValidationError(std::string(key) + ": unknown configuration key");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config: line " + std::to_string(line_no) +
                            " is not of the form key = value");
    }
    set_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  config.validate();
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace amsample
