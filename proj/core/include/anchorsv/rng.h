// core/include/anchorsv/rng.h

// Copyright 2026  The anchorsv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ANCHORSV_RNG_H_
#define ANCHORSV_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

namespace anchorsv {

/// Seeded generator with distributions defined here rather than by the
/// standard library, so draws are bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }
  /// Uniform in [0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t Below(std::uint64_t n);
  /// Standard normal (Box-Muller, one cached spare).
  double Gaussian();
  bool Bernoulli(double p) { return Uniform() < p; }

  template <typename T>
  void Shuffle(std::vector<T> &v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64-style combination of a base seed with stream identifiers.
std::uint64_t MixSeed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                      std::uint64_t c = 0);

/// Noise seeds for training augmentation and for evaluation live in disjoint
/// halves of the 64-bit space (top bit), so the two pools can never share a
/// noise draw.
enum class NoiseDomain : std::uint64_t { kTrain = 0, kEval = 1 };

std::uint64_t NoiseSeed(NoiseDomain domain, std::uint64_t base,
                        std::uint64_t a, std::uint64_t b = 0);
NoiseDomain DomainOf(std::uint64_t noise_seed);

}  // namespace anchorsv

#endif  // ANCHORSV_RNG_H_
