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

#ifndef PPKM_PARAMS_H_
#define PPKM_PARAMS_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ppkm/core.h"

namespace ppkm {

enum class BoundMode { kStrict, kWeak };

std::string_view BoundModeName(BoundMode mode);

// Admissible range for the scale factors r and the noise bound eps.
struct BoundReport {
  BoundMode mode = BoundMode::kStrict;
  // Strict: max over distinct triples (i, j, k) with a positive denominator of
  //   sum_l (x_il^2 - (x_il - x_kl)^2) /
  //   (2 sum_l ((x_il - x_kl)^2 - x_il (x_il - x_jl))).
  // Weak: w.
  double r_lower = 0.0;
  // Noise bound for the scale vector the report was computed against (unit
  // scales when none was given). Weak: w / 2.
  double eps_upper = 0.0;
  double w = 0.0;
  // Strict only: no triple had a positive denominator, so any r > 0 is
  // admissible and r_lower is 0.
  bool r_relaxed = false;
  // Strict only: per dimension, min over (i, j) with x_ik > x_jk, x_ik > 0 of
  // (x_ik - x_jk) / (2 x_ik). +inf when a dimension is constant.
  std::vector<double> eps_quotients;

  // Noise bound for an arbitrary 2d-entry r vector (scales at even offsets).
  double EpsUpperFor(std::span<const double> r) const;
};

// Dataset-dependent bounds. Costs O(n^2 (d + log n)); the dataset must be
// non-negative and contain two distinct points.
absl::StatusOr<BoundReport> StrictBounds(const Dataset& ds);
absl::StatusOr<BoundReport> StrictBounds(const Dataset& ds,
                                         std::span<const double> r);

// Constant-time rule: r > w and eps < w / 2.
absl::StatusOr<BoundReport> WeakBounds(double w);

enum class ScaleMode {
  // One scale shared by every attribute; shifts stay independent. Keeps the
  // transform a similarity up to noise, so distance comparisons survive.
  kUniform,
  // An independent scale per attribute.
  kIndependent,
};

std::string_view ScaleModeName(ScaleMode mode);

struct RandomizationParams {
  // 2d entries. Zero-based: r[2j] scales attribute j, r[2j + 1] shifts it.
  std::vector<double> r;
  // One per point, uniform in (0, eps_max).
  std::vector<double> epsilons;
  double eps_max = 0.0;

  size_t dim() const { return r.size() / 2; }
  double scale(size_t j) const { return r[2 * j]; }
  double shift(size_t j) const { return r[2 * j + 1]; }
  double min_scale() const;

  absl::Status Validate(size_t n, size_t d) const;
};

struct SamplingOptions {
  int ell1 = 64;  // bit length of the largest r
  int ell2 = 32;  // bit length of the largest eps
  uint64_t seed = 0;
  ScaleMode scale_mode = ScaleMode::kUniform;
};

// Noise cap for a sampled r: the report's eps bound, the unrelaxed triple
// bound r_min / r_lower (strict, r_lower > 0), and 2^ell2.
double NoiseCap(const BoundReport& bounds, std::span<const double> r, int ell2);

// Draws r from (max(r_lower, 2^(ell1-1)), 2^ell1) and eps_i from
// (0, NoiseCap). Deterministic under `options.seed`.
absl::StatusOr<RandomizationParams> SampleParams(const Dataset& ds,
                                                 const BoundReport& bounds,
                                                 const SamplingOptions& options);

// Fresh noise values in (0, eps_max) for late-arriving points.
std::vector<double> SampleNoise(size_t count, double eps_max, uint64_t seed);

// Guessing-probability accounting for bit lengths ell1 (r) and ell2 (eps).
struct SecurityPlan {
  uint64_t n = 0;
  uint64_t d = 0;
  int ell1 = 0;
  int ell2 = 0;
  // log2( C(2d,2) * n * 2^-(2 ell1) * 2^-ell2 ): guessing one coordinate of
  // a randomized point.
  double log2_p_guess_point = 0.0;
  // log2( 2d * C(n,3) * 2^-ell1 * 2^-(3 ell2) ): guessing an attribute-wise
  // quotient of two differences.
  double log2_p_guess_quotient = 0.0;
  bool ell1_exceeds_ell2 = false;
  // Both probabilities <= 2^-80.
  bool secure = false;
};

inline constexpr double kSecurityTargetLog2 = -80.0;

SecurityPlan MakeSecurityPlan(uint64_t n, uint64_t d, int ell1, int ell2);

// Minimum 2 ell1 + ell2 and ell1 + 3 ell2 for both probabilities to reach
// 2^log2_target.
struct BitLengthThresholds {
  double two_ell1_plus_ell2 = 0.0;
  double ell1_plus_three_ell2 = 0.0;
};

BitLengthThresholds RequiredBitLengths(uint64_t n, uint64_t d,
                                       double log2_target = kSecurityTargetLog2);

// log2 C(n, k); -inf when k > n.
double Log2Binomial(uint64_t n, uint64_t k);

}  // namespace ppkm

#endif  // PPKM_PARAMS_H_
