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

#include "ppkm/oracle.h"

#include <utility>

#include "absl/strings/str_cat.h"

namespace ppkm {
namespace {

ClusterAssignment LabelsById(const Dataset& ds, const std::vector<int>& labels) {
  ClusterAssignment out;
  for (size_t i = 0; i < ds.size(); ++i) out.emplace(ds.id(i), labels[i]);
  return out;
}

nlohmann::json RowsToJson(const std::vector<CostRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const CostRow& row : rows) {
    out.push_back({{"system", row.system},
                   {"role", row.role},
                   {"computation", row.computation},
                   {"communication", row.communication},
                   {"operation", row.operation},
                   {"value", row.value}});
  }
  return out;
}

}  // namespace

absl::StatusOr<OracleResult> Lloyd(const Dataset& ds,
                                   std::span<const PointId> initial_ids,
                                   double tolerance, int64_t max_iters) {
  const size_t k = initial_ids.size();
  if (k == 0) return absl::InvalidArgumentError("need at least one initial center");
  if (k > ds.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("k = ", k, " exceeds n = ", ds.size()));
  }
  if (max_iters < 0 || !(tolerance >= 0.0)) {
    return absl::InvalidArgumentError("max_iters and tolerance must be >= 0");
  }
  std::vector<Point> centers;
  for (PointId id : initial_ids) {
    const int64_t index = ds.IndexOf(id);
    if (index < 0) {
      return absl::InvalidArgumentError(absl::StrCat("unknown initial id ", id));
    }
    centers.push_back(ds.point(static_cast<size_t>(index)));
  }
  for (size_t a = 0; a < k; ++a) {
    for (size_t b = a + 1; b < k; ++b) {
      if (initial_ids[a] == initial_ids[b]) {
        return absl::InvalidArgumentError(
            absl::StrCat("initial id ", initial_ids[a], " repeated"));
      }
    }
  }

  OracleResult result;
  auto count = [&result](const Accumulation& acc) {
    result.op_counts.distance_evaluations += acc.distance_evaluations;
    result.op_counts.multiplications += acc.multiplications;
    result.op_counts.comparisons += acc.comparisons;
  };

  if (max_iters == 0) {
    Accumulation acc = AssignAndAccumulate(ds.points(), centers);
    count(acc);
    result.labels = LabelsById(ds, acc.labels);
    result.centers.centers = std::move(centers);
    return result;
  }

  for (int64_t round = 1; round <= max_iters; ++round) {
    Accumulation acc = AssignAndAccumulate(ds.points(), centers);
    count(acc);
    result.label_history.push_back(LabelsById(ds, acc.labels));
    result.center_history.push_back(centers);
    result.objective_history.push_back(
        WithinClusterSumOfSquares(ds.points(), acc.labels, centers));
    std::vector<Point> next = CentersFromSums(acc.sums, acc.counts, centers);
    for (int64_t c : acc.counts) {
      if (c > 0) {
        ++result.op_counts.inversions;
        result.op_counts.multiplications += static_cast<int64_t>(ds.dim());
      }
    }
    const bool converged = CentersConverged(centers, next, tolerance);
    centers = std::move(next);
    result.iterations = round;
    result.labels = result.label_history.back();
    if (converged) {
      result.converged = true;
      break;
    }
  }
  result.centers.centers = std::move(centers);
  return result;
}

nlohmann::json BaselineCost::ToJson() const {
  return {{"n", n},
          {"k", k},
          {"d", d},
          {"m", m},
          {"local_multiplications", local_multiplications},
          {"outsourced", RowsToJson(outsourced)}};
}

absl::StatusOr<BaselineCost> ComputeBaselineCost(int64_t n, int64_t k, int64_t d,
                                                 int64_t m) {
  if (n < 1 || k < 1 || d < 1 || m < 0) {
    return absl::InvalidArgumentError("need n, k, d >= 1 and m >= 0");
  }
  BaselineCost cost;
  cost.n = n;
  cost.k = k;
  cost.d = d;
  cost.m = m;
  cost.local_multiplications = n * k * d * m;
  const auto dn = static_cast<double>(n);
  const auto dk = static_cast<double>(k);
  const auto dd = static_cast<double>(d);
  const auto dm = static_cast<double>(m);
  cost.outsourced = {
      {"masked-lloyd", "owner", "O(nd)", "O(nU)", "multiplication", dn * dd},
      {"masked-lloyd", "servers 1..t-1", "O(k n_i d m)", "O(m(N_i + M_i))",
       "multiplication", dk * dn * dd * dm},
      {"masked-lloyd", "aggregator", "O(mk)", "O(mkC)", "inversion", dm * dk},
  };
  return cost;
}

nlohmann::json ShatterCost::ToJson() const {
  return {{"n", n},
          {"t", t},
          {"m", m},
          {"modulus", modulus},
          {"owner_inversions", owner_inversions},
          {"server_crt_operations", server_crt_operations},
          {"rows", RowsToJson(rows)}};
}

absl::StatusOr<ShatterCost> ComputeShatterCost(int64_t n, int64_t t, double modulus,
                                               int64_t m) {
  if (n < 1 || t < 1 || m < 0 || !(modulus > 0.0)) {
    return absl::InvalidArgumentError("need n, t >= 1, modulus > 0 and m >= 0");
  }
  ShatterCost cost;
  cost.n = n;
  cost.t = t;
  cost.m = m;
  cost.modulus = modulus;
  cost.owner_inversions = static_cast<double>(n) * static_cast<double>(t);
  cost.server_crt_operations =
      static_cast<double>(n) * modulus * modulus * static_cast<double>(m);
  cost.rows = {
      {"shatter-crt", "owner", "O(nt)", "O(nU)", "inversion", cost.owner_inversions},
      {"shatter-crt", "servers", "O(nN^2 m)", "O(n_i N_i)", "chinese remainder",
       cost.server_crt_operations},
  };
  return cost;
}

}  // namespace ppkm
