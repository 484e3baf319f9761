// Copyright 2026 The mfg-master-policy Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MFG_RNG_H_
#define MFG_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace mfg {

// All randomness flows from one root seed. Named substreams let components
// be re-seeded independently of each other.
inline std::uint64_t SplitMix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t Fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Derives a deterministic substream seed from (root, name).
inline std::uint64_t SubSeed(std::uint64_t root, std::string_view name) {
  return SplitMix64(root ^ Fnv1a64(name));
}

inline std::uint64_t SubSeed(std::uint64_t root, std::string_view name,
                             std::uint64_t index) {
  return SplitMix64(SubSeed(root, name) ^ SplitMix64(index));
}

inline std::mt19937_64 MakeRng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

}  // namespace mfg

#endif  // MFG_RNG_H_
