// Copyright 2026 The ppkm Authors
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

#ifndef PPKM_RNG_H_
#define PPKM_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>

namespace ppkm {

// SplitMix64 finalizer; used to derive independent sub-seeds from one run
// seed.
inline uint64_t MixSeed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Sub-seed streams for a protocol run.
enum class SeedStream : uint64_t {
  kScales = 1,
  kNoise = 2,
  kInitialCenters = 3,
  kKeys = 4,
  kPartition = 5,
  kIncrementalNoise = 6,
};

inline uint64_t DeriveSeed(uint64_t seed, SeedStream stream) {
  return MixSeed(seed, static_cast<uint64_t>(stream));
}

// Portable draws: std::uniform_real_distribution is implementation-defined,
// so values are built directly from the engine's 64-bit output.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in the open interval (0, 1).
  double NextOpenUnit() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform in (lo, hi).
  double Uniform(double lo, double hi) {
    const double v = lo + (hi - lo) * NextOpenUnit();
    if (v <= lo) return std::nextafter(lo, hi);
    if (v >= hi) return std::nextafter(hi, lo);
    return v;
  }

  // Uniform integer in [0, bound), bound > 0. Rejection sampling.
  uint64_t Below(uint64_t bound) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % bound;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ppkm

#endif  // PPKM_RNG_H_
