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

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "ppkm/csv.h"
#include "test_util.h"

namespace ppkm {
namespace {

TEST(DatasetTest, RejectsEmptyMismatchedAndDuplicate) {
  EXPECT_FALSE(Dataset::FromPoints({}).ok());
  EXPECT_FALSE(Dataset::FromPoints({Point{{1, 2}}, Point{{1}}}).ok());
  EXPECT_FALSE(Dataset::FromPoints({Point{{}}}).ok());
  EXPECT_FALSE(Dataset::Create({1, 1}, {Point{{1}}, Point{{2}}}).ok());
  EXPECT_FALSE(Dataset::Create({1}, {Point{{1}}, Point{{2}}}).ok());
}

TEST(DatasetTest, IndexOfFollowsIds) {
  auto ds = Dataset::Create({10, 3, 7}, {Point{{1}}, Point{{2}}, Point{{3}}});
  ASSERT_TRUE(ds.ok());
  EXPECT_EQ(ds->IndexOf(3), 1);
  EXPECT_EQ(ds->IndexOf(7), 2);
  EXPECT_EQ(ds->IndexOf(4), -1);
  EXPECT_EQ(ds->dim(), 1u);
}

TEST(DistanceTest, ThreeFourFive) {
  auto d = EuclideanDistance(Point{{0, 0}}, Point{{3, 4}});
  ASSERT_TRUE(d.ok());
  EXPECT_DOUBLE_EQ(*d, 5.0);
  EXPECT_FALSE(EuclideanDistance(Point{{0}}, Point{{3, 4}}).ok());
}

TEST(NearestCenterTest, TieGoesToLowestIndex) {
  const std::vector<Point> centers = {Point{{0.0}}, Point{{2.0}}, Point{{1.0}}};
  EXPECT_EQ(NearestCenter(std::vector<double>{1.0}, centers), 2);
  const std::vector<Point> tied = {Point{{0.0}}, Point{{2.0}}};
  EXPECT_EQ(NearestCenter(std::vector<double>{1.0}, tied), 0);
  int64_t comparisons = 0;
  NearestCenter(std::vector<double>{1.0}, centers, &comparisons);
  EXPECT_EQ(comparisons, 2);
}

TEST(TranslateTest, MinimumBecomesZeroAndDistancesSurvive) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-50, 50);
  std::vector<Point> pts(20, Point{std::vector<double>(3)});
  for (Point& p : pts) {
    for (double& v : p.coords) v = u(gen);
  }
  auto ds = Dataset::FromPoints(pts);
  auto moved = TranslateNonNegative(*ds);
  ASSERT_TRUE(moved.ok());
  for (size_t l = 0; l < 3; ++l) {
    double lo = INFINITY;
    for (const Point& p : moved->dataset.points()) lo = std::min(lo, p[l]);
    EXPECT_EQ(lo, 0.0);
  }
  for (size_t i = 0; i < pts.size(); ++i) {
    for (size_t j = 0; j < pts.size(); ++j) {
      EXPECT_NEAR(*EuclideanDistance(ds->point(i), ds->point(j)),
                  *EuclideanDistance(moved->dataset.point(i), moved->dataset.point(j)),
                  1e-12);
    }
    for (size_t l = 0; l < 3; ++l) {
      EXPECT_DOUBLE_EQ(moved->dataset.point(i)[l] + moved->offset[l], pts[i][l]);
    }
  }
}

TEST(TranslateTest, RejectsNonFinite) {
  auto ds = Dataset::FromPoints({Point{{1.0}}, Point{{NAN}}});
  EXPECT_FALSE(TranslateNonNegative(*ds).ok());
}

TEST(ConvergenceTest, RelativeToMagnitude) {
  const std::vector<Point> a = {Point{{1e18, 0.0}}};
  const std::vector<Point> b = {Point{{1e18 + 512.0, 0.0}}};
  EXPECT_TRUE(CentersConverged(a, b, 1e-9));
  EXPECT_FALSE(CentersConverged(a, b, 0.0));
  const std::vector<Point> small = {Point{{0.0}}};
  const std::vector<Point> moved = {Point{{2e-9}}};
  EXPECT_FALSE(CentersConverged(small, moved, 1e-9));
  EXPECT_TRUE(CentersConverged(small, small, 0.0));
}

TEST(AccumulateTest, SumsCountsAndCounters) {
  const std::vector<Point> pts = {Point{{1}}, Point{{2}}, Point{{9}}};
  const std::vector<Point> centers = {Point{{0}}, Point{{10}}};
  const Accumulation acc = AssignAndAccumulate(pts, centers);
  EXPECT_EQ(acc.labels, (std::vector<int>{0, 0, 1}));
  EXPECT_EQ(acc.sums[0][0], 3.0);
  EXPECT_EQ(acc.sums[1][0], 9.0);
  EXPECT_EQ(acc.counts, (std::vector<int64_t>{2, 1}));
  EXPECT_EQ(acc.distance_evaluations, 6);
  EXPECT_EQ(acc.multiplications, 6);
  EXPECT_EQ(acc.comparisons, 3);
}

TEST(AccumulateTest, EmptyClusterKeepsPreviousCenter) {
  const std::vector<Point> prev = {Point{{0}}, Point{{100}}};
  std::vector<bool> empty;
  const auto next = CentersFromSums({{6.0}, {0.0}}, std::vector<int64_t>{3, 0}, prev, &empty);
  EXPECT_EQ(next[0][0], 2.0);
  EXPECT_EQ(next[1][0], 100.0);
  EXPECT_EQ(empty, (std::vector<bool>{false, true}));
}

TEST(CsvTest, ParsesWithHeaderAndIdColumn) {
  auto ds = ParseCsv("name,x,y\n7,1.5,2\n3, -4 ,5e1\n", {true, 0});
  ASSERT_TRUE(ds.ok()) << ds.status();
  EXPECT_EQ(ds->ids(), (std::vector<PointId>{7, 3}));
  EXPECT_EQ(ds->point(1)[0], -4.0);
  EXPECT_EQ(ds->point(1)[1], 50.0);
}

TEST(CsvTest, ErrorsNameTheRow) {
  auto bad = ParseCsv("1,2\n3,x\n");
  ASSERT_FALSE(bad.ok());
  EXPECT_NE(bad.status().message().find("row 2"), std::string::npos);
  auto ragged = ParseCsv("1,2\n3\n");
  ASSERT_FALSE(ragged.ok());
  EXPECT_NE(ragged.status().message().find("row 2"), std::string::npos);
  EXPECT_FALSE(ParseCsv("").ok());
  EXPECT_FALSE(ParseCsv("1,2\n1,3\n", {false, 0}).ok());  // duplicate id
}

TEST(CsvTest, FormatRoundTripsExactly) {
  const Dataset ds = testing::RandomBlobs(5, 30, 4, 3);
  auto back = ParseCsv(FormatCsv(ds), {true, 0});
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->ids(), ds.ids());
  EXPECT_EQ(back->points(), ds.points());
}

}  // namespace
}  // namespace ppkm
