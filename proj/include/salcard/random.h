/*
 * Copyright 2026 The salcard Authors.
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

#ifndef SALCARD_RANDOM_H_
#define SALCARD_RANDOM_H_

#include <cstdint>
#include <random>

namespace salcard {

// SplitMix64 finalizer. Used to derive independent child seeds so that every
// stochastic component can be replayed from one 64-bit root seed.
constexpr uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr uint64_t DeriveSeed(uint64_t seed, uint64_t stream) {
  return MixSeed(MixSeed(seed) ^ MixSeed(stream + 0x632be59bd9b4e019ULL));
}

// Portable random stream. std::mt19937_64 output is fully specified by the
// standard; the standard distributions are not, so the transforms below are
// written out to keep draws identical across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(MixSeed(seed)) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). Rejection sampling removes modulo bias.
  uint64_t UniformInt(uint64_t n);

  // Standard normal via the Marsaglia polar method.
  double Normal();

  double Normal(double mean, double stddev) {
    return mean + stddev * Normal();
  }

  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace salcard

#endif  // SALCARD_RANDOM_H_
