// Copyright 2026 The Hyperstep Authors.
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

#ifndef HYPERSTEP_RNG_H_
#define HYPERSTEP_RNG_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace hyperstep {

// 64-bit finalizer from splitmix64. Used to derive independent stream seeds.
uint64_t mix64(uint64_t x);

// FNV-1a over raw bytes.
uint64_t fnv1a64(std::string_view bytes, uint64_t basis = 0xcbf29ce484222325ULL);

// Seed of sub-stream `stream` of `seed`. Streams are pre-split so concurrent
// consumers stay reproducible regardless of scheduling.
uint64_t derive_seed(uint64_t seed, uint64_t stream);

std::string hex64(uint64_t value);

// Thin wrapper over mt19937_64. Distributions are implemented here rather
// than with <random> adaptors, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  uint64_t below(uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Index drawn from an unnormalized non-negative weight vector.
  size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace hyperstep

#endif  // HYPERSTEP_RNG_H_
