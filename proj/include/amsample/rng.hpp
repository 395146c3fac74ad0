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

#ifndef AMSAMPLE_RNG_HPP
#define AMSAMPLE_RNG_HPP

#include <cstdint>
#include <random>

#include "amsample/core.hpp"

namespace amsample {

/// Source of standard Gaussian noise consumed by the samplers.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  /// Fills `out` with independent N(0, 1) draws.
  virtual void normal(Eigen::Ref<Vector> out) = 0;

  Vector normal(Eigen::Index dim) {
    Vector out(dim);
    normal(out);
    return out;
  }
};

/// Deterministic pseudo-random stream identified by (master_seed, stream_id).
///
/// Streams with different ids are statistically independent; the same pair
/// always reproduces the same sequence of draws.
class RngStream final : public NoiseSource {
 public:
  static constexpr std::uint64_t kReferenceStream = (std::uint64_t{1} << 63) - 1;
  static constexpr std::uint64_t kProjectionStream = (std::uint64_t{1} << 63) - 2;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  /// Stream of child `k` of this stream. Children of distinct parents do not
  /// collide with each other or with top-level streams.
  RngStream split(std::uint64_t k) const;

  void normal(Eigen::Ref<Vector> out) override;
  using NoiseSource::normal;

  double normal();
  double uniform();
  std::uint64_t next_u64() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id,
            std::uint64_t parent_tag);

  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t tag_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

/// Noise source returning exact zeros; turns a sampler into its deterministic
/// drift iteration.
class ZeroNoise final : public NoiseSource {
 public:
  void normal(Eigen::Ref<Vector> out) override { out.setZero(); }
  using NoiseSource::normal;
};

}  // namespace amsample

#endif  // AMSAMPLE_RNG_HPP
