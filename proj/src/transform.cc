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

#include "ppkm/transform.h"

#include <algorithm>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "ppkm/rng.h"

namespace ppkm {

TransformedPoint RandomizePoint(PointId id, const Point& x, double eps,
                                const RandomizationParams& params,
                                TransformCounters* counters) {
  TransformedPoint out{id, Point{std::vector<double>(x.dim())}};
  for (size_t j = 0; j < x.dim(); ++j) {
    out.coords[j] = (params.scale(j) + eps) * x[j] + params.shift(j);
  }
  if (counters != nullptr) {
    counters->multiplications += static_cast<int64_t>(x.dim());
    counters->additions += 2 * static_cast<int64_t>(x.dim());
  }
  return out;
}

absl::StatusOr<std::vector<TransformedPoint>> Randomize(
    const Dataset& ds, const RandomizationParams& params,
    TransformCounters* counters) {
  if (absl::Status s = params.Validate(ds.size(), ds.dim()); !s.ok()) return s;
  std::vector<TransformedPoint> out;
  out.reserve(ds.size());
  for (size_t i = 0; i < ds.size(); ++i) {
    out.push_back(RandomizePoint(ds.id(i), ds.point(i), params.epsilons[i],
                                 params, counters));
  }
  return out;
}

absl::StatusOr<IncrementalBatch> RandomizeIncremental(
    std::span<const Point> points, std::span<const PointId> ids,
    const RandomizationParams& params, uint64_t fresh_eps_seed,
    TransformCounters* counters) {
  if (points.size() != ids.size()) {
    return absl::InvalidArgumentError("ids and points differ in length");
  }
  for (const Point& p : points) {
    if (p.dim() != params.dim()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "dimension mismatch: point has ", p.dim(), ", run has ",
          params.dim()));
    }
  }
  IncrementalBatch batch;
  batch.epsilons = SampleNoise(points.size(), params.eps_max, fresh_eps_seed);
  batch.points.reserve(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    batch.points.push_back(
        RandomizePoint(ids[i], points[i], batch.epsilons[i], params, counters));
  }
  return batch;
}

std::string_view PartitionStrategyName(PartitionStrategy strategy) {
  switch (strategy) {
    case PartitionStrategy::kRoundRobin:
      return "round-robin";
    case PartitionStrategy::kContiguous:
      return "contiguous";
    case PartitionStrategy::kSeededShuffle:
      return "seeded-shuffle";
  }
  return "?";
}

absl::StatusOr<PartitionStrategy> ParsePartitionStrategy(std::string_view name) {
  for (PartitionStrategy s :
       {PartitionStrategy::kRoundRobin, PartitionStrategy::kContiguous,
        PartitionStrategy::kSeededShuffle}) {
    if (PartitionStrategyName(s) == name) return s;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown partition strategy '", std::string(name), "'"));
}

absl::StatusOr<Partition> MakePartition(std::vector<TransformedPoint> points,
                                        int t, PartitionStrategy strategy,
                                        uint64_t seed) {
  if (t < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("need t >= 2 servers, got ", t));
  }
  const size_t servers = static_cast<size_t>(t - 1);
  const size_t n = points.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  if (strategy == PartitionStrategy::kSeededShuffle) {
    Rng rng(seed);
    for (size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng.Below(i)]);
    }
  }
  Partition partition;
  partition.shares.resize(servers);
  for (size_t pos = 0; pos < n; ++pos) {
    size_t server;
    if (strategy == PartitionStrategy::kContiguous) {
      // The first n mod s servers take ceil(n / s) points, the rest floor.
      const size_t base = n / servers;
      const size_t extra = n % servers;
      const size_t big_block = (base + 1) * extra;
      server = pos < big_block ? pos / (base + 1)
                               : extra + (pos - big_block) / base;
    } else {
      server = pos % servers;
    }
    TransformedPoint& p = points[order[pos]];
    if (!partition.server_of.emplace(p.id, static_cast<int>(server)).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate point id ", p.id));
    }
    partition.shares[server].push_back(std::move(p));
  }
  return partition;
}

}  // namespace ppkm
