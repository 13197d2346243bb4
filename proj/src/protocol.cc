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

#include "ppkm/protocol.h"

#include <numeric>

#include "absl/strings/str_cat.h"
#include "ppkm/rng.h"

namespace ppkm {

absl::StatusOr<ShareAssignment> AssignClusters(
    std::span<const TransformedPoint> share, const CentroidSet& centers) {
  if (centers.k() == 0) {
    return absl::InvalidArgumentError("need at least one center");
  }
  std::vector<Point> coords;
  coords.reserve(share.size());
  for (const TransformedPoint& p : share) {
    if (p.coords.dim() != centers.centers[0].dim()) {
      return absl::InvalidArgumentError(
          absl::StrCat("point ", p.id, " has the wrong dimension"));
    }
    coords.push_back(p.coords);
  }
  Accumulation acc = AssignAndAccumulate(coords, centers.centers);
  ShareAssignment out;
  for (size_t i = 0; i < share.size(); ++i) out.labels[share[i].id] = acc.labels[i];
  out.sums = std::move(acc.sums);
  out.counts = std::move(acc.counts);
  out.distance_evaluations = acc.distance_evaluations;
  out.multiplications = acc.multiplications;
  out.comparisons = acc.comparisons;
  return out;
}

SharesMsg MaskShare(const std::vector<std::vector<double>>& sums,
                    std::span<const int64_t> counts, const RoundKeys& keys,
                    int server) {
  SharesMsg msg;
  msg.server = server;
  msg.round = keys.round;
  msg.masked_sums = sums;
  for (auto& row : msg.masked_sums) {
    for (double& v : row) v *= keys.x;
  }
  msg.masked_counts.reserve(counts.size());
  for (int64_t m : counts) msg.masked_counts.push_back(keys.y * static_cast<double>(m));
  return msg;
}

absl::StatusOr<CentroidsMsg> Aggregate(std::span<const SharesMsg> shares) {
  if (shares.empty()) return absl::InvalidArgumentError("no shares to aggregate");
  const SharesMsg& first = shares.front();
  const size_t k = first.masked_counts.size();
  const size_t d = first.masked_sums.empty() ? 0 : first.masked_sums[0].size();
  std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
  std::vector<double> counts(k, 0.0);
  for (const SharesMsg& s : shares) {
    if (s.round != first.round) {
      return absl::FailedPreconditionError(absl::StrCat(
          "protocol error: share from server ", s.server, " is for round ",
          s.round, ", expected ", first.round));
    }
    if (s.masked_counts.size() != k || s.masked_sums.size() != k) {
      return absl::FailedPreconditionError(absl::StrCat(
          "protocol error: share from server ", s.server, " has ",
          s.masked_counts.size(), " clusters, expected ", k));
    }
    for (size_t j = 0; j < k; ++j) {
      if (s.masked_sums[j].size() != d) {
        return absl::FailedPreconditionError("protocol error: dimension mismatch");
      }
      for (size_t l = 0; l < d; ++l) sums[j][l] += s.masked_sums[j][l];
      counts[j] += s.masked_counts[j];
    }
  }
  CentroidsMsg out;
  out.round = first.round;
  out.scaled_centers.resize(k);
  out.empty.assign(k, false);
  for (size_t j = 0; j < k; ++j) {
    if (counts[j] == 0.0) {
      out.empty[j] = true;
      continue;
    }
    const double inverse = 1.0 / counts[j];
    out.scaled_centers[j].resize(d);
    for (size_t l = 0; l < d; ++l) out.scaled_centers[j][l] = sums[j][l] * inverse;
  }
  return out;
}

absl::StatusOr<CentroidSet> UnscaleCentroids(const CentroidsMsg& msg,
                                             const RoundKeys& keys,
                                             const CentroidSet& previous) {
  if (msg.scaled_centers.size() != previous.k()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "protocol error: got ", msg.scaled_centers.size(), " centers, expected ",
        previous.k()));
  }
  const double ratio = keys.y / keys.x;
  CentroidSet out;
  out.centers.resize(previous.k());
  for (size_t j = 0; j < previous.k(); ++j) {
    if (j < msg.empty.size() && msg.empty[j]) {
      out.centers[j] = previous.centers[j];
      continue;
    }
    out.centers[j].coords.resize(msg.scaled_centers[j].size());
    for (size_t l = 0; l < msg.scaled_centers[j].size(); ++l) {
      out.centers[j][l] = msg.scaled_centers[j][l] * ratio;
    }
  }
  return out;
}

absl::StatusOr<std::vector<PointId>> SampleInitialCenterIds(
    std::span<const PointId> ids, int k, uint64_t seed) {
  if (k < 1 || static_cast<size_t>(k) > ids.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "k must be in [1, n]; got k = ", k, ", n = ", ids.size()));
  }
  std::vector<size_t> order(ids.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  std::vector<PointId> chosen;
  chosen.reserve(k);
  for (int i = 0; i < k; ++i) {
    const size_t pick = i + rng.Below(order.size() - i);
    std::swap(order[i], order[pick]);
    chosen.push_back(ids[order[i]]);
  }
  return chosen;
}

}  // namespace ppkm
