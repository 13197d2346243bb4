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

#ifndef PPKM_ANALYSIS_H_
#define PPKM_ANALYSIS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "ppkm/core.h"
#include "ppkm/params.h"
#include "ppkm/transport.h"

namespace ppkm {

// Noise contribution to the squared distance between two transformed points,
// per coordinate l with scale r_l, difference dx = x1_l - x2_l and
// de = eps1*x1_l - eps2*x2_l:
//   lambda2_l = 2 r_l dx de,  lambda1_l = de^2 + lambda2_l.
struct ErrorTerms {
  std::vector<double> lambda1;
  std::vector<double> lambda2;
  double scaled_sq = 0.0;  // sum r_l^2 dx^2
  double exact_sq = 0.0;   // sum (r_l dx + de)^2, the true transformed distance^2
  double approx_sq = 0.0;  // scaled_sq + sum lambda2, quadratic noise dropped
  double exact_distance = 0.0;
  double approx_distance = 0.0;  // NaN when approx_sq < 0
  // approx_sq < 0: the noise exceeds what the strict bound allows.
  bool bound_violation = false;
};

absl::StatusOr<ErrorTerms> ComputeErrorTerms(const Point& x1, const Point& x2,
                                             double eps1, double eps2,
                                             const RandomizationParams& params);

// Lower bound on the divergence between a coordinate quotient of the
// randomized data and the same quotient of the plaintext:
//   d * (x11-x21)/(x41-x31) * log((r1 + eps*x41/(x41-x31)) / (r1 - eps*x21/(x11-x21)))
// Fails when either difference is zero or the log argument is not positive.
absl::StatusOr<double> KdQuotientBound(double x11, double x21, double x31, double x41,
                                       double r1, double eps, int64_t d);

struct SignedKd {
  double value = 0.0;
  double magnitude = 0.0;
};

// Aggregator view of masked sums over masked counts: -log(x/y) * sum(d/m).
SignedKd KdAggregator(double x, double y, double sum_d_over_m);
// sum over clusters and coordinates of d_j[l] / m_j. Every m_j must be > 0.
absl::StatusOr<double> SumDOverM(const std::vector<std::vector<double>>& sums,
                                 std::span<const int64_t> counts);
// Ratio of the same value under two masks: -log(x1/x2) * z.
SignedKd KdSameMask(double x1, double x2, double z);

struct AttackCostReport {
  double K = 0.0, R = 0.0, c = 0.0;
  int64_t d = 0;
  double log2_x = 0.0;  // log2(C(K,2) * (R/c)^d)

  nlohmann::json ToJson() const;
};

absl::StatusOr<AttackCostReport> AttackCost(double K, double R, double c, int64_t d);

struct AttackTableRow {
  AttackCostReport cost;
  int printed_exponent = 0;
};

// The ten (R, c, d) settings with |K| = 2 and their published exponents.
std::vector<AttackTableRow> AttackTable();

// Per-round leakage of a finished in-process transcript. The key chain is
// replayed from the Init keys and the Centroids payloads; the unmasked
// d/m ratios follow from the masked shares once x and y are known.
struct RoundLeakage {
  int64_t round = 0;
  double x = 0.0, y = 0.0;
  double sum_d_over_m = 0.0;
  SignedKd aggregator;           // this round's keys
  bool has_next = false;
  SignedKd same_mask;            // x of this round vs x of the next, z = n
};

struct TranscriptLeakage {
  int64_t points = 0;
  std::vector<RoundLeakage> rounds;

  nlohmann::json ToJson() const;
};

absl::StatusOr<TranscriptLeakage> AnalyzeTranscript(
    std::span<const std::string> lines);

}  // namespace ppkm

#endif  // PPKM_ANALYSIS_H_
