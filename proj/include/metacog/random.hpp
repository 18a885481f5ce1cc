// Copyright 2026 The metacog Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METACOG_RANDOM_HPP_
#define METACOG_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace metacog {

// All randomness flows from one master seed. Sub-streams are keyed by
// (seed, label, index) so that a grid cell or Monte-Carlo replication draws
// the same numbers no matter which order the work is scheduled in.

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t HashLabel(std::string_view label) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view label,
                                std::uint64_t index = 0) {
  return SplitMix64(SplitMix64(seed ^ HashLabel(label)) + index);
}

using Rng = std::mt19937_64;

inline Rng MakeStream(std::uint64_t seed, std::string_view label,
                      std::uint64_t index = 0) {
  return Rng(DeriveSeed(seed, label, index));
}

}  // namespace metacog

#endif  // METACOG_RANDOM_HPP_
