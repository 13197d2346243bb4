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

#ifndef PPKM_TRANSFORM_H_
#define PPKM_TRANSFORM_H_

#include <cstdint>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "ppkm/core.h"
#include "ppkm/params.h"

namespace ppkm {

// A randomized point: coordinate j is (r_scale_j + eps_i) * x_ij + r_shift_j.
struct TransformedPoint {
  PointId id = 0;
  Point coords;

  friend bool operator==(const TransformedPoint&,
                         const TransformedPoint&) = default;
};

struct TransformCounters {
  int64_t multiplications = 0;
  int64_t additions = 0;
};

absl::StatusOr<std::vector<TransformedPoint>> Randomize(
    const Dataset& ds, const RandomizationParams& params,
    TransformCounters* counters = nullptr);

// Randomizes one point with noise `eps`.
TransformedPoint RandomizePoint(PointId id, const Point& x, double eps,
                                const RandomizationParams& params,
                                TransformCounters* counters = nullptr);

struct IncrementalBatch {
  std::vector<TransformedPoint> points;
  std::vector<double> epsilons;  // owner-side only
};

// Randomizes late-arriving points with the run's fixed r and fresh noise in
// (0, eps_max).
absl::StatusOr<IncrementalBatch> RandomizeIncremental(
    std::span<const Point> points, std::span<const PointId> ids,
    const RandomizationParams& params, uint64_t fresh_eps_seed,
    TransformCounters* counters = nullptr);

enum class PartitionStrategy { kRoundRobin, kContiguous, kSeededShuffle };

std::string_view PartitionStrategyName(PartitionStrategy strategy);
absl::StatusOr<PartitionStrategy> ParsePartitionStrategy(std::string_view name);

// Horizontal split over the t - 1 compute servers. Server indices here are
// zero-based; on the wire compute servers are numbered 1..t-1.
struct Partition {
  std::vector<std::vector<TransformedPoint>> shares;
  std::map<PointId, int> server_of;
};

absl::StatusOr<Partition> MakePartition(std::vector<TransformedPoint> points,
                                        int t,
                                        PartitionStrategy strategy =
                                            PartitionStrategy::kRoundRobin,
                                        uint64_t seed = 0);

}  // namespace ppkm

#endif  // PPKM_TRANSFORM_H_
