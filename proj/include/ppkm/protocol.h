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

#ifndef PPKM_PROTOCOL_H_
#define PPKM_PROTOCOL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "ppkm/core.h"
#include "ppkm/keysched.h"
#include "ppkm/messages.h"
#include "ppkm/transform.h"

namespace ppkm {

// Steps 1-3 of a Lloyd's step on one server's share: nearest-center labels
// (ties to the lowest index), per-cluster coordinate sums d_ij and counts m_ij.
struct ShareAssignment {
  ClusterAssignment labels;
  std::vector<std::vector<double>> sums;
  std::vector<int64_t> counts;
  int64_t distance_evaluations = 0;
  int64_t multiplications = 0;
  int64_t comparisons = 0;
};

absl::StatusOr<ShareAssignment> AssignClusters(
    std::span<const TransformedPoint> share, const CentroidSet& centers);

// x * d_ij and y * m_ij. Nothing else is hidden.
SharesMsg MaskShare(const std::vector<std::vector<double>>& sums,
                    std::span<const int64_t> counts, const RoundKeys& keys,
                    int server = 0);

// Per cluster: sum_i(x d_ij) / sum_i(y m_ij), summed in the order given.
// A cluster whose masked counts sum to zero is flagged empty.
absl::StatusOr<CentroidsMsg> Aggregate(std::span<const SharesMsg> shares);

// Multiplies the scaled centers by y / x. Empty clusters keep `previous`.
absl::StatusOr<CentroidSet> UnscaleCentroids(const CentroidsMsg& msg,
                                             const RoundKeys& keys,
                                             const CentroidSet& previous);

// k distinct ids drawn uniformly, in draw order.
absl::StatusOr<std::vector<PointId>> SampleInitialCenterIds(
    std::span<const PointId> ids, int k, uint64_t seed);

}  // namespace ppkm

#endif  // PPKM_PROTOCOL_H_
