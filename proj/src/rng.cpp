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

#include "amsample/rng.hpp"

namespace amsample {

namespace {

std::seed_seq make_seed_seq(std::uint64_t master, std::uint64_t id,
                            std::uint64_t tag) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  return std::seed_seq{lo(master), hi(master), lo(id), hi(id), lo(tag), hi(tag)};
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : RngStream(master_seed, stream_id, 0) {}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id,
                     std::uint64_t parent_tag)
    : master_seed_(master_seed), stream_id_(stream_id), tag_(parent_tag) {
  auto seq = make_seed_seq(master_seed, stream_id, parent_tag);
  engine_.seed(seq);
}

RngStream RngStream::split(std::uint64_t k) const {
  // The tag chains the parent identity so grandchildren stay distinct.
  std::uint64_t tag = (tag_ * 0x9E3779B97F4A7C15ULL) ^ (stream_id_ + 1) ^
                      0xD1B54A32D192ED03ULL;
  return RngStream(master_seed_, k, tag);
}

void RngStream::normal(Eigen::Ref<Vector> out) {
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = gauss_(engine_);
}

double RngStream::normal() { return gauss_(engine_); }

double RngStream::uniform() { return unif_(engine_); }

}  // namespace amsample
