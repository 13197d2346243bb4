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

#include "ppkm/core.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace ppkm {

Dataset::Dataset(std::vector<PointId> ids, std::vector<Point> points,
                 size_t dim)
    : ids_(std::move(ids)), points_(std::move(points)), dim_(dim) {
  for (size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
}

absl::StatusOr<Dataset> Dataset::Create(std::vector<PointId> ids,
                                        std::vector<Point> points) {
  if (points.empty()) {
    return absl::InvalidArgumentError("dataset must contain at least one point");
  }
  if (ids.size() != points.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "got ", ids.size(), " ids for ", points.size(), " points"));
  }
  const size_t dim = points.front().dim();
  if (dim == 0) {
    return absl::InvalidArgumentError("points must have dimension >= 1");
  }
  std::map<PointId, size_t> seen;
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != dim) {
      return absl::InvalidArgumentError(
          absl::StrCat("point ", i, " has dimension ", points[i].dim(),
                       ", expected ", dim));
    }
    if (!seen.emplace(ids[i], i).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate point id ", ids[i]));
    }
  }
  return Dataset(std::move(ids), std::move(points), dim);
}

absl::StatusOr<Dataset> Dataset::FromPoints(std::vector<Point> points) {
  std::vector<PointId> ids(points.size());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<PointId>(i);
  return Create(std::move(ids), std::move(points));
}

int64_t Dataset::IndexOf(PointId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : static_cast<int64_t>(it->second);
}

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

absl::StatusOr<double> EuclideanDistance(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "dimension mismatch: ", a.dim(), " vs ", b.dim()));
  }
  return std::sqrt(SquaredDistance(a.coords, b.coords));
}

int NearestCenter(std::span<const double> p, const std::vector<Point>& centers,
                  int64_t* comparisons) {
  int best = 0;
  double best_distance = SquaredDistance(p, centers[0].coords);
  for (size_t j = 1; j < centers.size(); ++j) {
    const double distance = SquaredDistance(p, centers[j].coords);
    if (comparisons != nullptr) ++*comparisons;
    // Strict comparison keeps the lowest index on ties.
    if (distance < best_distance) {
      best_distance = distance;
      best = static_cast<int>(j);
    }
  }
  return best;
}

absl::StatusOr<Translation> TranslateNonNegative(const Dataset& ds) {
  Point offset{std::vector<double>(ds.dim())};
  for (size_t l = 0; l < ds.dim(); ++l) {
    double lo = ds.point(0)[l];
    for (const Point& p : ds.points()) {
      if (!std::isfinite(p[l])) {
        return absl::InvalidArgumentError(
            absl::StrCat("non-finite coordinate in dimension ", l));
      }
      lo = std::min(lo, p[l]);
    }
    offset[l] = lo;
  }
  std::vector<Point> shifted = ds.points();
  for (Point& p : shifted) {
    for (size_t l = 0; l < p.dim(); ++l) p[l] -= offset[l];
  }
  auto translated = Dataset::Create(ds.ids(), std::move(shifted));
  if (!translated.ok()) return translated.status();
  return Translation{*std::move(translated), std::move(offset)};
}

bool CentersConverged(const std::vector<Point>& prev,
                      const std::vector<Point>& next, double tolerance) {
  if (prev.size() != next.size()) return false;
  for (size_t j = 0; j < prev.size(); ++j) {
    double magnitude = 1.0;
    double moved = 0.0;
    for (size_t l = 0; l < prev[j].dim(); ++l) {
      magnitude = std::max(magnitude, std::abs(prev[j][l]));
      moved = std::max(moved, std::abs(next[j][l] - prev[j][l]));
    }
    if (!(moved <= tolerance * magnitude)) return false;
  }
  return true;
}

Accumulation AssignAndAccumulate(std::span<const Point> points,
                                 const std::vector<Point>& centers) {
  const size_t k = centers.size();
  const size_t d = centers.empty() ? 0 : centers[0].dim();
  Accumulation acc;
  acc.labels.reserve(points.size());
  acc.sums.assign(k, std::vector<double>(d, 0.0));
  acc.counts.assign(k, 0);
  for (const Point& p : points) {
    const int label = NearestCenter(p.coords, centers, &acc.comparisons);
    acc.labels.push_back(label);
    for (size_t l = 0; l < d; ++l) acc.sums[label][l] += p[l];
    ++acc.counts[label];
  }
  acc.distance_evaluations = static_cast<int64_t>(points.size() * k);
  acc.multiplications = acc.distance_evaluations * static_cast<int64_t>(d);
  return acc;
}

std::vector<Point> CentersFromSums(const std::vector<std::vector<double>>& sums,
                                   std::span<const int64_t> counts,
                                   const std::vector<Point>& previous,
                                   std::vector<bool>* empty) {
  std::vector<Point> next(sums.size());
  if (empty != nullptr) empty->assign(sums.size(), false);
  for (size_t j = 0; j < sums.size(); ++j) {
    if (counts[j] == 0) {
      next[j] = previous[j];
      if (empty != nullptr) (*empty)[j] = true;
      continue;
    }
    next[j].coords.resize(sums[j].size());
    for (size_t l = 0; l < sums[j].size(); ++l) {
      next[j][l] = sums[j][l] / static_cast<double>(counts[j]);
    }
  }
  return next;
}

double WithinClusterSumOfSquares(std::span<const Point> points,
                                 std::span<const int> labels,
                                 const std::vector<Point>& centers) {
  double total = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    total += SquaredDistance(points[i].coords, centers[labels[i]].coords);
  }
  return total;
}

}  // namespace ppkm
