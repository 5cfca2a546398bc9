// Copyright 2026 The diffmech Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace diffmech {

/// The seeded generator used everywhere randomness is consumed.
using Rng = std::mt19937_64;

/// Derives an independent 64-bit seed for a sub-stream identified by
/// (master, a, b). Used so that trial i of group g draws the same numbers no
/// matter which worker runs it or in which order.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
      static_cast<std::uint32_t>(a),      static_cast<std::uint32_t>(a >> 32),
      static_cast<std::uint32_t>(b),      static_cast<std::uint32_t>(b >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline Rng make_stream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  return Rng(stream_seed(master, a, b));
}

/// Uniform draw on [0, 1).
inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace diffmech
