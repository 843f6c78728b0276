// core/src/rng.cc

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

#include "anchorsv/rng.h"

#include <cmath>
#include <limits>
#include <numbers>

namespace anchorsv {

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::Below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

double Rng::Gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = Uniform();
  } while (u1 <= 0.0);
  double u2 = Uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

namespace {
std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t MixSeed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                      std::uint64_t c) {
  std::uint64_t h = SplitMix(base);
  h = SplitMix(h ^ a);
  h = SplitMix(h ^ (b + 0x632be59bd9b4e019ULL));
  h = SplitMix(h ^ (c + 0x8cb92ba72f3d8dd7ULL));
  return h;
}

std::uint64_t NoiseSeed(NoiseDomain domain, std::uint64_t base, std::uint64_t a,
                        std::uint64_t b) {
  constexpr std::uint64_t kTopBit = 1ULL << 63;
  std::uint64_t h = MixSeed(base, 0x6e6f697365ULL, a, b) & ~kTopBit;
  return domain == NoiseDomain::kEval ? (h | kTopBit) : h;
}

NoiseDomain DomainOf(std::uint64_t noise_seed) {
  return (noise_seed >> 63) != 0 ? NoiseDomain::kEval : NoiseDomain::kTrain;
}

}  // namespace anchorsv
