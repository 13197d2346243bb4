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

#include "ppkm/analysis.h"

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "ppkm/report.h"
#include "ppkm/session.h"
#include "ppkm/transform.h"
#include "test_util.h"

namespace ppkm {
namespace {

RandomizationParams Scales(std::vector<double> r) {
  RandomizationParams p;
  p.r = std::move(r);
  p.eps_max = 1.0;
  return p;
}

TEST(ErrorTermsTest, NoNoise) {
  auto t = ComputeErrorTerms(Point{{3, 1}}, Point{{1, 4}}, 0, 0,
                             Scales({2, 9, 5, 1}));
  ASSERT_TRUE(t.ok());
  EXPECT_EQ(t->lambda1, (std::vector<double>{0, 0}));
  EXPECT_EQ(t->lambda2, (std::vector<double>{0, 0}));
  EXPECT_DOUBLE_EQ(t->scaled_sq, 4 * 4 + 25 * 9);
  EXPECT_DOUBLE_EQ(t->exact_distance, std::sqrt(241.0));
  EXPECT_DOUBLE_EQ(t->approx_distance, std::sqrt(241.0));
  EXPECT_FALSE(t->bound_violation);
}

TEST(ErrorTermsTest, IdenticalPointsEqualNoise) {
  auto t = ComputeErrorTerms(Point{{3, 7}}, Point{{3, 7}}, 0.3, 0.3,
                             Scales({2, 9, 5, 1}));
  ASSERT_TRUE(t.ok());
  EXPECT_EQ(t->lambda1, (std::vector<double>{0, 0}));
  EXPECT_EQ(t->exact_distance, 0.0);
}

TEST(ErrorTermsTest, HandValues) {
  // dx = 2, de = 0.5*3 - 0.25*1 = 1.25, r = 4.
  auto t = ComputeErrorTerms(Point{{3}}, Point{{1}}, 0.5, 0.25, Scales({4, 0}));
  ASSERT_TRUE(t.ok());
  EXPECT_DOUBLE_EQ(t->lambda2[0], 2 * 4 * 2 * 1.25);
  EXPECT_DOUBLE_EQ(t->lambda1[0], 1.25 * 1.25 + 20);
  EXPECT_DOUBLE_EQ(t->exact_sq, 9.25 * 9.25);
  EXPECT_DOUBLE_EQ(t->approx_sq, 64 + 20);
}

TEST(ErrorTermsTest, NegativeRadicandIsReported) {
  // dx = 1, de = -9, r = 1: 1 + 2 * 1 * (-9) < 0.
  auto bad = ComputeErrorTerms(Point{{11}}, Point{{10}}, 0, 0.9, Scales({1, 0}));
  ASSERT_TRUE(bad.ok());
  EXPECT_TRUE(bad->bound_violation);
  EXPECT_TRUE(std::isnan(bad->approx_distance));
  EXPECT_FALSE(ComputeErrorTerms(Point{{1}}, Point{{1, 2}}, 0, 0,
                                 Scales({1, 0})).ok());
}

TEST(ErrorTermsProperty, QuadraticGapIsNonNegative) {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 100.0), e(0.0, 5.0);
  for (int trial = 0; trial < 5000; ++trial) {
    const size_t d = 1 + trial % 6;
    Point a{std::vector<double>(d)}, b{std::vector<double>(d)};
    std::vector<double> r;
    for (size_t l = 0; l < d; ++l) {
      a[l] = u(gen);
      b[l] = u(gen);
      r.push_back(1 + u(gen));
      r.push_back(u(gen));
    }
    auto t = ComputeErrorTerms(a, b, e(gen), e(gen), Scales(r));
    ASSERT_TRUE(t.ok());
    for (size_t l = 0; l < d; ++l) {
      EXPECT_GE(t->lambda1[l] - t->lambda2[l], 0.0);
    }
  }
}

// On data prepared with strict bounds, the linearized radicand stays
// positive and the dropped quadratic term is at most d (eps_max x_max)^2.
TEST(ErrorTermsProperty, StrictBoundsKeepRadicandPositive) {
  for (uint64_t seed = 0; seed < 60; ++seed) {
    Dataset ds = testing::RandomBlobs(seed, 25, 1 + seed % 5, 3);
    auto prepared = PrepareData(ds, testing::StrictPrepare(seed));
    ASSERT_TRUE(prepared.ok()) << prepared.status();
    const Dataset& data = prepared->data;
    const RandomizationParams& params = prepared->params;
    double x_max = 0;
    for (const Point& p : data.points()) {
      for (double v : p.coords) x_max = std::max(x_max, v);
    }
    const double cap = static_cast<double>(data.dim()) *
                       std::pow(params.eps_max * x_max, 2);
    for (size_t i = 0; i < data.size(); ++i) {
      for (size_t j = i + 1; j < data.size(); ++j) {
        auto t = ComputeErrorTerms(data.point(i), data.point(j),
                                   params.epsilons[i], params.epsilons[j],
                                   params);
        ASSERT_TRUE(t.ok());
        EXPECT_FALSE(t->bound_violation) << seed << " " << i << " " << j;
        const double gap = t->exact_sq - t->approx_sq;
        EXPECT_GE(gap, -1e-9 * t->exact_sq);
        EXPECT_LE(gap, cap * (1 + 1e-9) + 1e-9 * t->exact_sq);
      }
    }
  }
}

TEST(KdQuotientBoundTest, HighPrecisionFixture) {
  // Reference from a 50-digit evaluation of the same closed form.
  auto v = KdQuotientBound(4, 1, 2, 6, 10, 0.1, 8);
  ASSERT_TRUE(v.ok()) << v.status();
  EXPECT_NEAR(*v, 0.1093650825555917244, 1e-15);
}

TEST(KdQuotientBoundTest, ZeroNoiseIsZero) {
  EXPECT_EQ(*KdQuotientBound(4, 1, 2, 6, 10, 0.0, 8), 0.0);
}

TEST(KdQuotientBoundTest, Errors) {
  EXPECT_EQ(KdQuotientBound(4, 4, 2, 6, 10, 0.1, 8).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_FALSE(KdQuotientBound(4, 1, 6, 6, 10, 0.1, 8).ok());
  EXPECT_FALSE(KdQuotientBound(4, 1, 2, 6, 0, 0.1, 8).ok());
  EXPECT_FALSE(KdQuotientBound(4, 1, 2, 6, 10, 0.1, 0).ok());
  auto big = KdQuotientBound(4, 1, 2, 6, 10, 30, 8);
  EXPECT_EQ(big.status().code(), absl::StatusCode::kOutOfRange);
  EXPECT_NE(big.status().message().find("too large"), std::string::npos);
}

TEST(KdQuotientBoundProperty, NonNegativeAndIncreasingInNoise) {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> grid(0, 99);
  int checked = 0;
  while (checked < 2000) {
    double x11 = grid(gen), x21 = grid(gen), x31 = grid(gen), x41 = grid(gen);
    if (x11 <= x21 || x41 <= x31) continue;
    const double r1 = 1 + grid(gen);
    const int64_t d = 1 + grid(gen) % 16;
    double prev = 0;
    for (double eps = 1e-3; eps < 1e3; eps *= 2) {
      auto v = KdQuotientBound(x11, x21, x31, x41, r1, eps, d);
      if (!v.ok()) {
        EXPECT_EQ(v.status().code(), absl::StatusCode::kOutOfRange);
        break;
      }
      EXPECT_GE(*v, 0.0);
      EXPECT_GT(*v, prev);
      prev = *v;
    }
    ++checked;
  }
}

TEST(KdAggregatorTest, Values) {
  EXPECT_NEAR(KdAggregator(2, 4, 3).value, 2.0794415416798359, 1e-15);
  EXPECT_EQ(KdAggregator(5, 5, 3).value, 0.0);
  SignedKd neg = KdAggregator(4, 2, 3);
  EXPECT_LT(neg.value, 0.0);
  EXPECT_EQ(neg.magnitude, -neg.value);
  EXPECT_EQ(KdSameMask(7, 7, 100).value, 0.0);
  EXPECT_NEAR(KdSameMask(1, std::exp(1.0), 10).value, 10.0, 1e-12);
}

TEST(SumDOverMTest, SumsEveryCoordinate) {
  const std::vector<int64_t> counts = {2, 4};
  auto v = SumDOverM({{2, 4}, {8, 12}}, counts);
  ASSERT_TRUE(v.ok());
  EXPECT_DOUBLE_EQ(*v, 1 + 2 + 2 + 3);
  const std::vector<int64_t> empty = {2, 0};
  EXPECT_FALSE(SumDOverM({{2, 4}, {8, 12}}, empty).ok());
  const std::vector<int64_t> short_counts = {2};
  EXPECT_FALSE(SumDOverM({{2, 4}, {8, 12}}, short_counts).ok());
}

TEST(AttackCostTest, Examples) {
  EXPECT_NEAR(AttackCost(2, 1000, 0.01, 2)->log2_x, 33.2, 0.05);
  EXPECT_NEAR(AttackCost(2, 10, 0.001, 8)->log2_x, 106.3, 0.05);
  EXPECT_NEAR(AttackCost(2, 5, 5, 7)->log2_x, 0.0, 1e-12);
  EXPECT_FALSE(AttackCost(1, 10, 1, 2).ok());
  EXPECT_FALSE(AttackCost(2, 10, 0, 2).ok());
  EXPECT_FALSE(AttackCost(2, 10, 1, 0).ok());
}

TEST(AttackCostTest, TableMatchesReference) {
  // log2 values from an arbitrary-precision evaluation.
  const double expected[] = {33.219280948873623, 49.828921423310435,
                             66.438561897747247, 66.438561897747247,
                             79.726274277296696, 106.30169903639559,
                             119.58941141594504, 132.87712379549449,
                             159.45254855459339, 182.70604521880493};
  const auto table = AttackTable();
  ASSERT_EQ(table.size(), 10u);
  for (size_t i = 0; i < table.size(); ++i) {
    EXPECT_NEAR(table[i].cost.log2_x, expected[i], 1e-9) << i;
    EXPECT_LE(std::abs(table[i].cost.log2_x - table[i].printed_exponent), 2.0)
        << i;
  }
}

TEST(AttackCostProperty, IncreasingInDimensionAndResolution) {
  for (int64_t d = 1; d < 20; ++d) {
    for (double ratio : {2.0, 10.0, 1e3, 1e5}) {
      const double base = AttackCost(3, ratio, 1, d)->log2_x;
      EXPECT_GT(AttackCost(3, ratio, 1, d + 1)->log2_x, base);
      EXPECT_GT(AttackCost(3, ratio * 2, 1, d)->log2_x, base);
      EXPECT_GT(AttackCost(3, ratio, 0.5, d)->log2_x, base);
    }
  }
}

TEST(AnalyzeTranscriptTest, ReplaysKeysFromARun) {
  Dataset ds = testing::RandomBlobs(8, 50, 3, 3);
  auto prepared = PrepareData(ds, testing::StrictPrepare(8));
  ASSERT_TRUE(prepared.ok());
  RunConfig config;
  config.k = 3;
  config.t = 3;
  config.seed = 8;
  auto run = RunInProcess(prepared->data, prepared->params, config);
  ASSERT_TRUE(run.ok());
  auto leak = AnalyzeTranscript(run->transcript.lines());
  ASSERT_TRUE(leak.ok()) << leak.status();
  EXPECT_EQ(leak->points, 50);
  ASSERT_EQ(leak->rounds.size(), static_cast<size_t>(run->iterations));
  for (size_t r = 0; r < leak->rounds.size(); ++r) {
    const RoundLeakage& row = leak->rounds[r];
    EXPECT_EQ(row.round, int64_t(r + 1));
    EXPECT_EQ(row.x, run->key_history[0][r].x);
    EXPECT_EQ(row.y, run->key_history[0][r].y);
    EXPECT_GT(row.sum_d_over_m, 0.0);
    EXPECT_EQ(row.aggregator.value,
              KdAggregator(row.x, row.y, row.sum_d_over_m).value);
    if (r + 1 < leak->rounds.size()) {
      ASSERT_TRUE(row.has_next);
      EXPECT_EQ(row.same_mask.value,
                KdSameMask(row.x, run->key_history[0][r + 1].x, 50).value);
    }
  }
  EXPECT_TRUE(leak->ToJson().contains("rounds"));
}

TEST(AnalyzeTranscriptTest, RejectsBrokenInput) {
  const std::vector<std::string> garbage = {"{"};
  EXPECT_FALSE(AnalyzeTranscript(garbage).ok());
  const std::vector<std::string> empty;
  EXPECT_FALSE(AnalyzeTranscript(empty).ok());
}

}  // namespace
}  // namespace ppkm
