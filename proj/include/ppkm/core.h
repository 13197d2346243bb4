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

#ifndef PPKM_CORE_H_
#define PPKM_CORE_H_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace ppkm {

using PointId = int64_t;

// A point in R^d. Coordinates are plain doubles; the dimension is whatever
// the owning Dataset says it is.
struct Point {
  std::vector<double> coords;

  size_t dim() const { return coords.size(); }
  double operator[](size_t i) const { return coords[i]; }
  double& operator[](size_t i) { return coords[i]; }

  friend bool operator==(const Point&, const Point&) = default;
};

// The owner's plaintext: n >= 1 points of a common dimension d >= 1, each
// carrying a unique id that survives transformation and partitioning.
class Dataset {
 public:
  static absl::StatusOr<Dataset> Create(std::vector<PointId> ids,
                                        std::vector<Point> points);
  // Ids are assigned as 0..n-1.
  static absl::StatusOr<Dataset> FromPoints(std::vector<Point> points);

  size_t size() const { return points_.size(); }
  size_t dim() const { return dim_; }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<PointId>& ids() const { return ids_; }
  const Point& point(size_t i) const { return points_[i]; }
  PointId id(size_t i) const { return ids_[i]; }

  // Index of `id`, or -1.
  int64_t IndexOf(PointId id) const;

 private:
  Dataset(std::vector<PointId> ids, std::vector<Point> points, size_t dim);

  std::vector<PointId> ids_;
  std::vector<Point> points_;
  size_t dim_ = 0;
  std::map<PointId, size_t> index_;
};

// Point id -> cluster index in [0, k).
using ClusterAssignment = std::map<PointId, int>;

struct CentroidSet {
  std::vector<Point> centers;

  size_t k() const { return centers.size(); }
};

absl::StatusOr<double> EuclideanDistance(const Point& a, const Point& b);

// Unchecked squared distance; callers guarantee equal dimension.
double SquaredDistance(std::span<const double> a, std::span<const double> b);

// Index of the nearest center by squared Euclidean distance. Ties go to the
// lowest index. `comparisons`, when given, is incremented once per center
// compared after the first.
int NearestCenter(std::span<const double> p, const std::vector<Point>& centers,
                  int64_t* comparisons = nullptr);

struct Translation {
  Dataset dataset;
  // Per-dimension minimum of the input; original = translated + offset.
  Point offset;
};

// Shifts every dimension so its minimum becomes 0. Pairwise distances are
// unchanged.
absl::StatusOr<Translation> TranslateNonNegative(const Dataset& ds);

// True when every center moved by at most tol * max(1, |prev|_inf) in the
// max-norm. tol = 0 means exact equality.
bool CentersConverged(const std::vector<Point>& prev,
                      const std::vector<Point>& next, double tolerance);

// Result of one assignment pass over a list of points.
struct Accumulation {
  std::vector<int> labels;                // per input point
  std::vector<std::vector<double>> sums;  // k x d coordinate sums
  std::vector<int64_t> counts;            // k
  int64_t distance_evaluations = 0;
  int64_t multiplications = 0;
  int64_t comparisons = 0;
};

// Labels each point with its nearest center and accumulates per-cluster sums
// and counts. Shared by the protocol's compute servers and the plaintext
// reference so both use identical tie-breaking.
Accumulation AssignAndAccumulate(std::span<const Point> points,
                                 const std::vector<Point>& centers);

// New centers from sums/counts; clusters with a zero count keep `previous`.
// `empty` (optional) receives the per-cluster empty flags.
std::vector<Point> CentersFromSums(const std::vector<std::vector<double>>& sums,
                                   std::span<const int64_t> counts,
                                   const std::vector<Point>& previous,
                                   std::vector<bool>* empty = nullptr);

// Sum over points of the squared distance to the assigned center.
double WithinClusterSumOfSquares(std::span<const Point> points,
                                 std::span<const int> labels,
                                 const std::vector<Point>& centers);

}  // namespace ppkm

#endif  // PPKM_CORE_H_
