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

#ifndef PPKM_ORACLE_H_
#define PPKM_ORACLE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "ppkm/core.h"

namespace ppkm {

struct OracleOpCounts {
  int64_t distance_evaluations = 0;
  int64_t multiplications = 0;
  int64_t inversions = 0;
  int64_t comparisons = 0;
};

struct OracleResult {
  ClusterAssignment labels;
  CentroidSet centers;
  int64_t iterations = 0;
  bool converged = false;
  OracleOpCounts op_counts;
  // Entry r holds iteration r + 1: the labels it assigned, the centers it
  // assigned against, and the objective of those labels against those centers.
  std::vector<ClusterAssignment> label_history;
  std::vector<std::vector<Point>> center_history;
  std::vector<double> objective_history;
};

// Plain Lloyd's k-means on `ds`, starting from the points named by
// `initial_ids`. Iteration r assigns every point against the centers of
// iteration r - 1 and recomputes the means; the run stops once no center
// moves by more than the tolerance (same rule as the protocol) or after
// max_iters iterations. max_iters = 0 returns the initial assignment.
absl::StatusOr<OracleResult> Lloyd(const Dataset& ds,
                                   std::span<const PointId> initial_ids,
                                   double tolerance, int64_t max_iters);

// Symbolic cost rows. `value` is filled when every symbol is bound.
struct CostRow {
  std::string system;
  std::string role;
  std::string computation;
  std::string communication;
  std::string operation;
  double value = 0.0;
};

struct BaselineCost {
  int64_t n = 0, k = 0, d = 0, m = 0;
  // Distance-term multiplications of running Lloyd's locally: n*k*d*m.
  int64_t local_multiplications = 0;
  std::vector<CostRow> outsourced;  // this protocol, per role

  nlohmann::json ToJson() const;
};

absl::StatusOr<BaselineCost> ComputeBaselineCost(int64_t n, int64_t k, int64_t d,
                                                 int64_t m);

// Cost model of the shatter/CRT scheme this protocol is compared against.
// Not an implementation: owner inversions n*t, server CRT merging n*N^2*m.
struct ShatterCost {
  int64_t n = 0, t = 0, m = 0;
  double modulus = 0.0;  // N
  double owner_inversions = 0.0;
  double server_crt_operations = 0.0;
  std::vector<CostRow> rows;

  nlohmann::json ToJson() const;
};

absl::StatusOr<ShatterCost> ComputeShatterCost(int64_t n, int64_t t, double modulus,
                                               int64_t m);

}  // namespace ppkm

#endif  // PPKM_ORACLE_H_
