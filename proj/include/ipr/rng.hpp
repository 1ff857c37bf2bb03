/*
 * Copyright 2026 The IPR Toolkit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Portable seeded randomness. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the derived draws below are written out
// by hand because std:: distributions differ between library vendors.
//
//   stream seed  = splitmix64(splitmix64(seed) ^ stream)
//   unit double  = (next() >> 11) * 2^-53
//   bounded(n)   = next() % n, rejecting next() >= 2^64 - (2^64 mod n)

#ifndef IPR_RNG_HPP_
#define IPR_RNG_HPP_

#include <cstdint>
#include <limits>
#include <random>

#include "ipr/error.hpp"

namespace ipr {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(splitmix64(splitmix64(seed) ^ stream)) {}

  std::uint64_t next() { return engine_(); }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n).
  std::uint64_t bounded(std::uint64_t n) {
    if (n == 0) throw Error("Rng::bounded: empty range");
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
    std::uint64_t r = next();
    while (r > limit) r = next();
    return r % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ipr

#endif  // IPR_RNG_HPP_
