// Copyright 2026 The Privsel Authors
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

// Counter-based random streams. Every Monte Carlo trial draws from its own
// SplitMix64 stream keyed by (seed, trial index), so results do not depend on
// how trials are scheduled across threads.

#ifndef PRIVSEL_RNG_H_
#define PRIVSEL_RNG_H_

#include <cstdint>
#include <limits>

namespace privsel {

// The SplitMix64 output function (Steele, Lea and Flood).
constexpr uint64_t Mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// SplitMix64 generator. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = uint64_t;

  explicit constexpr SplitMix64(uint64_t state) : state_(state) {}

  // Independent stream number `index` derived from `seed`.
  static constexpr SplitMix64 ForStream(uint64_t seed, uint64_t index) {
    return SplitMix64(Mix64(seed + 0x632be59bd9b4e019ULL) ^
                      Mix64(index * 0x9e3779b97f4a7c15ULL + 1));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix64(state_);
  }

 private:
  uint64_t state_;
};

// Uniform double strictly inside (0, 1) built from the top 53 bits.
template <typename URBG>
double UniformOpen01(URBG& gen) {
  static_assert(URBG::max() == std::numeric_limits<uint64_t>::max() &&
                URBG::min() == 0);
  const uint64_t bits = gen() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace privsel

#endif  // PRIVSEL_RNG_H_
