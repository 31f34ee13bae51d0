// Copyright 2026 The bpslab Authors.
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

#ifndef BPSLAB_RNG_H_
#define BPSLAB_RNG_H_

#include <cstdint>
#include <random>
#include <span>

namespace bpslab {

// Versioned generator used by every stochastic operation.
//
// bpslab-rng-v1: std::mt19937_64 seeded with the 64-bit seed. Conversions
// are fixed here instead of using the std:: distributions, whose output is
// implementation-defined:
//   uniform double   u = (x >> 11) * 2^-53            in [0, 1)
//   bounded integer  k = floor(x * n / 2^64)           in [0, n)
//   categorical      smallest i with u < cumsum(p)[i] (inverse CDF)
// Independent streams (trials, seeds) are derived as base_seed + index.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "bpslab-rng-v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  double Uniform();
  std::size_t UniformIndex(std::size_t n);
  // `probs` need not be normalized; must have positive total mass.
  std::size_t Categorical(std::span<const double> probs);
  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

inline Rng DeriveStream(std::uint64_t base_seed, std::uint64_t index) {
  return Rng(base_seed + index);
}

}  // namespace bpslab

#endif  // BPSLAB_RNG_H_
