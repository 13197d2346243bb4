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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "json.hpp"
#include "ppkm/analysis.h"
#include "ppkm/core.h"
#include "ppkm/keysched.h"
#include "ppkm/oracle.h"
#include "ppkm/params.h"
#include "ppkm/protocol.h"
#include "ppkm/report.h"
#include "ppkm/session.h"
#include "ppkm/transform.h"
#include "test_util.h"

namespace ppkm {
namespace {

// Pinned tolerances and sizes.
constexpr int kEquivalenceDatasets = 60;
constexpr double kEquivalenceBudgetSeconds = 60.0;
constexpr int kMaskFixtures = 10000;
constexpr double kMaskRelativeTolerance = 1e-9;
constexpr double kAttackTableBits = 2.0;
constexpr double kSecurityTableBits = 4.0;
constexpr double kThreshold1 = 105.0, kThreshold1Bits = 2.0;
constexpr double kThreshold2 = 130.0, kThreshold2Bits = 1.0;
constexpr int kBoundDatasets = 1000;
constexpr int kKlQuadruples = 100;
constexpr int kKlGrid = 100;
constexpr int kTransportFixtures = 5;
constexpr int kCostRuns = 20;
constexpr int kDeterminismRuns = 10;

int failures = 0;

void Report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("criterion %d (%s): %s - %s\n", id, name, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

struct Case {
  Dataset data;
  PreparedData prepared;
  RunConfig config;
};

absl::StatusOr<Case> MakeCase(uint64_t seed, size_t n_lo, size_t n_hi) {
  std::mt19937_64 gen(seed * 7919 + 17);
  const size_t n = n_lo + gen() % (n_hi - n_lo + 1);
  const size_t d = 2 + gen() % 7;
  const int k = 2 + static_cast<int>(gen() % 4);
  const int clusters = 1 + static_cast<int>(gen() % 6);
  Dataset data = testing::RandomBlobs(seed, n, d, clusters);
  auto prepared = PrepareData(data, testing::StrictPrepare(seed));
  if (!prepared.ok()) return prepared.status();
  RunConfig config;
  config.k = k;
  config.t = 2 + static_cast<int>(gen() % 4);
  config.seed = seed;
  config.max_iters = 100;
  config.partition = static_cast<PartitionStrategy>(gen() % 3);
  return Case{std::move(data), *std::move(prepared), config};
}

void Equivalence() {
  const auto start = std::chrono::steady_clock::now();
  int passed = 0;
  std::string first_failure;
  for (int s = 0; s < kEquivalenceDatasets; ++s) {
    auto c = MakeCase(1000 + s, 20, 500);
    if (!c.ok()) {
      if (first_failure.empty()) first_failure = c.status().ToString();
      continue;
    }
    auto run = RunInProcess(c->prepared.data, c->prepared.params, c->config);
    if (!run.ok()) {
      if (first_failure.empty()) first_failure = run.status().ToString();
      continue;
    }
    auto oracle = Lloyd(c->prepared.data, run->initial_center_ids,
                        c->config.tolerance, c->config.max_iters);
    if (!oracle.ok()) continue;
    const OracleComparison cmp = CompareWithOracle(*run, *oracle);
    if (cmp.assignments_match && cmp.iterations_equal && cmp.per_iteration) {
      ++passed;
    } else if (first_failure.empty()) {
      first_failure = absl::StrCat("dataset seed ", 1000 + s, ": mismatch at iteration ",
                                   cmp.first_mismatch_iteration, ", iterations ",
                                   run->iterations, " vs ", oracle->iterations);
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = passed == kEquivalenceDatasets && seconds < kEquivalenceBudgetSeconds;
  Report(1, "equivalence", pass,
         absl::StrFormat("%d/%d datasets match at every iteration, %.1f s (budget %.0f s)%s",
                         passed, kEquivalenceDatasets, seconds, kEquivalenceBudgetSeconds,
                         first_failure.empty() ? "" : "; first failure: " + first_failure));
}

void MaskTransparency() {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  int bad = 0;
  for (int f = 0; f < kMaskFixtures; ++f) {
    const size_t d = 1 + gen() % 8;
    const size_t k = 1 + gen() % 5;
    const int servers = 1 + static_cast<int>(gen() % 5);
    // Keys on the magnitude classes the protocol uses.
    const int ell1 = 1 + static_cast<int>(gen() % 64);
    const RoundKeys keys{1.0 + unit(gen) * (std::ldexp(1.0, ell1) - 1.0),
                         1.0 + unit(gen) * (std::ldexp(1.0, ell1) - 1.0), 1};
    const double magnitude = std::ldexp(1.0, static_cast<int>(gen() % 70));
    std::vector<SharesMsg> shares;
    std::vector<std::vector<double>> total_sums(k, std::vector<double>(d, 0.0));
    std::vector<int64_t> total_counts(k, 0);
    for (int i = 0; i < servers; ++i) {
      std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
      std::vector<int64_t> counts(k, 0);
      for (size_t j = 0; j < k; ++j) {
        counts[j] = static_cast<int64_t>(gen() % 50);
        for (int64_t p = 0; p < counts[j]; ++p) {
          for (size_t l = 0; l < d; ++l) sums[j][l] += magnitude * unit(gen);
        }
        total_counts[j] += counts[j];
        for (size_t l = 0; l < d; ++l) total_sums[j][l] += sums[j][l];
      }
      shares.push_back(MaskShare(sums, counts, keys, i + 1));
    }
    auto msg = Aggregate(shares);
    CentroidSet previous;
    previous.centers.assign(k, Point{std::vector<double>(d, -1.0)});
    auto centers = UnscaleCentroids(*msg, keys, previous);
    if (!msg.ok() || !centers.ok()) {
      ++bad;
      continue;
    }
    for (size_t j = 0; j < k; ++j) {
      for (size_t l = 0; l < d; ++l) {
        const double expected = total_counts[j] == 0
                                    ? -1.0
                                    : total_sums[j][l] / static_cast<double>(total_counts[j]);
        const double got = centers->centers[j][l];
        const double rel = expected == 0.0 ? std::abs(got)
                                           : std::abs(got - expected) / std::abs(expected);
        worst = std::max(worst, rel);
        if (!(rel <= kMaskRelativeTolerance)) ++bad;
      }
    }
  }
  Report(2, "mask transparency", bad == 0,
         absl::StrFormat("%d fixtures, worst relative error %.3g (tolerance %.0e), %d bad",
                         kMaskFixtures, worst, kMaskRelativeTolerance, bad));
}

void AttackTableCheck() {
  const std::string cmd = absl::StrCat(PPKM_CLI_PATH, " analyze --attack-table");
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string text;
  if (pipe != nullptr) {
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) text.append(buf, got);
  }
  const int status = pipe == nullptr ? -1 : pclose(pipe);
  nlohmann::json out = nlohmann::json::parse(text, nullptr, false);
  if (status != 0 || out.is_discarded() || !out.contains("attack_table")) {
    Report(3, "attack table", false, "analyze --attack-table failed");
    return;
  }
  double worst = 0.0;
  const auto& rows = out["attack_table"];
  for (const auto& row : rows) {
    worst = std::max(worst, std::abs(row["log2_x"].get<double>() -
                                     row["printed_exponent"].get<double>()));
  }
  Report(3, "attack table", rows.size() == 10 && worst <= kAttackTableBits,
         absl::StrFormat("%d rows, worst |log2 x - printed| = %.3f bits (tolerance %.0f)",
                         static_cast<int>(rows.size()), worst, kAttackTableBits));
}

void SecurityTable() {
  struct Row {
    int ell1, ell2;
    double printed_point, printed_quotient;
  };
  const Row rows[] = {{34, 32, -77, -80}, {40, 32, -89, -82}, {64, 32, -137, -110},
                      {128, 8, -241, -102}};
  double worst = 0.0;
  for (const Row& r : rows) {
    const SecurityPlan p = MakeSecurityPlan(1 << 16, 16, r.ell1, r.ell2);
    worst = std::max({worst, std::abs(p.log2_p_guess_point - r.printed_point),
                      std::abs(p.log2_p_guess_quotient - r.printed_quotient)});
  }
  const BitLengthThresholds th = RequiredBitLengths(1 << 16, 16, -80.0);
  const bool pass = worst <= kSecurityTableBits &&
                    std::abs(th.two_ell1_plus_ell2 - kThreshold1) <= kThreshold1Bits &&
                    std::abs(th.ell1_plus_three_ell2 - kThreshold2) <= kThreshold2Bits;
  Report(4, "bit-length table", pass,
         absl::StrFormat("worst deviation %.3f bits (tolerance %.0f); thresholds "
                         "2*ell1+ell2 >= %.3f, ell1+3*ell2 >= %.3f",
                         worst, kSecurityTableBits, th.two_ell1_plus_ell2,
                         th.ell1_plus_three_ell2));
}

int Sign(double v) { return (v > 0.0) - (v < 0.0); }

void BoundValidity() {
  int64_t negative_radicands = 0, inversions = 0, comparisons = 0, plain_ties = 0;
  int datasets = 0;
  std::string first;
  for (int s = 0; s < kBoundDatasets; ++s) {
    auto c = MakeCase(50000 + s, 10, 60);
    if (!c.ok()) {
      if (first.empty()) first = c.status().ToString();
      continue;
    }
    const Dataset& ds = c->prepared.data;
    const RandomizationParams& params = c->prepared.params;
    for (size_t i = 0; i < ds.size(); ++i) {
      for (size_t j = i + 1; j < ds.size(); ++j) {
        auto terms = ComputeErrorTerms(ds.point(i), ds.point(j), params.epsilons[i],
                                       params.epsilons[j], params);
        if (!terms.ok() || terms->bound_violation) ++negative_radicands;
      }
    }
    auto run = RunInProcess(ds, params, c->config);
    if (!run.ok()) {
      if (first.empty()) first = run.status().ToString();
      continue;
    }
    auto oracle = Lloyd(ds, run->initial_center_ids, c->config.tolerance,
                        c->config.max_iters);
    auto transformed = Randomize(ds, params);
    const size_t rounds =
        std::min(run->center_history.size(), oracle->center_history.size());
    for (size_t r = 0; r < rounds; ++r) {
      const auto& plain_centers = oracle->center_history[r];
      const auto& protocol_centers = run->center_history[r];
      for (size_t i = 0; i < ds.size(); ++i) {
        const Point& x = ds.point(i);
        const Point& xt = (*transformed)[i].coords;
        for (size_t a = 0; a < plain_centers.size(); ++a) {
          for (size_t b = a + 1; b < plain_centers.size(); ++b) {
            const int plain = Sign(SquaredDistance(x.coords, plain_centers[a].coords) -
                                   SquaredDistance(x.coords, plain_centers[b].coords));
            const int masked =
                Sign(SquaredDistance(xt.coords, protocol_centers[a].coords) -
                     SquaredDistance(xt.coords, protocol_centers[b].coords));
            ++comparisons;
            if (plain == 0) {
              ++plain_ties;
            } else if (plain != masked) {
              ++inversions;
              if (first.empty()) {
                first = absl::StrCat("dataset seed ", 50000 + s, " round ", r + 1,
                                     " point ", i);
              }
            }
          }
        }
      }
    }
    ++datasets;
  }
  Report(5, "bound validity", datasets == kBoundDatasets && negative_radicands == 0 &&
                                  inversions == 0,
         absl::StrFormat("%d/%d datasets, %d negative radicands, %d inversions in %d "
                         "comparisons (%d exact plaintext ties)%s",
                         datasets, kBoundDatasets, negative_radicands, inversions,
                         comparisons, plain_ties, first.empty() ? "" : "; first: " + first));
}

void KlMonotonicity() {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int good = 0;
  std::string first;
  for (int q = 0; q < kKlQuadruples; ++q) {
    const double x21 = 100.0 * unit(gen);
    const double x11 = x21 + 0.01 + 100.0 * unit(gen);
    const double x31 = 100.0 * unit(gen);
    const double x41 = x31 + 0.01 + 100.0 * unit(gen);
    const double r1 = 1.0 + 1000.0 * unit(gen);
    const int64_t d = 1 + static_cast<int64_t>(gen() % 16);
    // Valid while r1 - eps * x21 / (x11 - x21) > 0.
    const double limit = x21 > 0.0 ? r1 * (x11 - x21) / x21 : r1;
    const double top = 0.99 * std::min(limit, r1);
    bool ok = true;
    auto at0 = KdQuotientBound(x11, x21, x31, x41, r1, 0.0, d);
    ok = at0.ok() && *at0 == 0.0;
    double prev = 0.0;
    for (int g = 1; g < kKlGrid && ok; ++g) {
      const double eps = top * g / (kKlGrid - 1);
      auto v = KdQuotientBound(x11, x21, x31, x41, r1, eps, d);
      ok = v.ok() && *v > prev && *v >= 0.0;
      if (v.ok()) prev = *v;
    }
    if (ok) {
      ++good;
    } else if (first.empty()) {
      first = absl::StrCat("quadruple ", q);
    }
  }
  Report(6, "divergence monotonicity", good == kKlQuadruples,
         absl::StrFormat("%d/%d quadruples zero at eps=0 and strictly increasing over "
                         "%d grid points%s",
                         good, kKlQuadruples, kKlGrid,
                         first.empty() ? "" : "; first failure: " + first));
}

std::string CentersText(const RunResult& run, const PreparedData& p) {
  return CentersJson(run.centers,
                     EstimateOriginalCenters(run.centers, p.params, p.offset))
      .dump(2);
}

void TransportEquivalence() {
  int same = 0;
  std::string first;
  for (int f = 0; f < kTransportFixtures; ++f) {
    auto c = MakeCase(9000 + f, 20, 200);
    if (!c.ok()) continue;
    auto local = RunInProcess(c->prepared.data, c->prepared.params, c->config);
    auto cluster = LocalTcpCluster::Start(c->config.t);
    if (!local.ok() || !cluster.ok()) {
      if (first.empty()) first = "setup failed";
      continue;
    }
    auto remote = RunOverTcp(c->prepared.data, c->prepared.params, c->config,
                             (*cluster)->topology());
    const absl::Status joined = (*cluster)->Join();
    if (!remote.ok() || !joined.ok()) {
      if (first.empty()) {
        first = remote.ok() ? joined.ToString() : remote.status().ToString();
      }
      continue;
    }
    if (FormatLabelsCsv(local->labels) == FormatLabelsCsv(remote->labels) &&
        CentersText(*local, c->prepared) == CentersText(*remote, c->prepared)) {
      ++same;
    } else if (first.empty()) {
      first = absl::StrCat("fixture ", f, " differs");
    }
  }
  Report(7, "transport equivalence", same == kTransportFixtures,
         absl::StrFormat("%d/%d fixtures byte-identical labels and centers%s", same,
                         kTransportFixtures, first.empty() ? "" : "; " + first));
}

void CostAccounting() {
  int good = 0;
  std::string first;
  for (int s = 0; s < kCostRuns; ++s) {
    auto c = MakeCase(7000 + s, 20, 300);
    if (!c.ok()) continue;
    auto run = RunInProcess(c->prepared.data, c->prepared.params, c->config);
    if (!run.ok()) continue;
    const int64_t n = static_cast<int64_t>(c->prepared.data.size());
    const int64_t d = static_cast<int64_t>(c->prepared.data.dim());
    const int64_t k = c->config.k;
    const int64_t m = run->iterations;
    int64_t owner_mults = -1, server_evals = 0, expected_evals = 0;
    for (const auto& [endpoint, counters] : run->counters) {
      if (endpoint.kind == RoleKind::kOwner) owner_mults = counters.multiplications;
      if (endpoint.kind == RoleKind::kServer) server_evals += counters.distance_evaluations;
    }
    for (size_t n_i : run->share_sizes) expected_evals += static_cast<int64_t>(n_i) * k * m;
    if (owner_mults == n * d && server_evals == expected_evals) {
      ++good;
    } else if (first.empty()) {
      first = absl::StrCat("seed ", 7000 + s, ": owner ", owner_mults, " vs ", n * d,
                           ", servers ", server_evals, " vs ", expected_evals);
    }
  }
  Report(8, "cost accounting", good == kCostRuns,
         absl::StrFormat("%d/%d runs: owner multiplications = n*d, server distance "
                         "evaluations = sum n_i*k*m%s",
                         good, kCostRuns, first.empty() ? "" : "; " + first));
}

void Determinism() {
  int same = 0;
  bool seeds_matter = true;
  for (int s = 0; s < kDeterminismRuns; ++s) {
    auto c1 = MakeCase(3000 + s, 20, 200);
    auto c2 = MakeCase(3000 + s, 20, 200);
    if (!c1.ok() || !c2.ok()) continue;
    auto a = RunInProcess(c1->prepared.data, c1->prepared.params, c1->config);
    auto b = RunInProcess(c2->prepared.data, c2->prepared.params, c2->config);
    if (a.ok() && b.ok() && a->transcript.ToJsonl() == b->transcript.ToJsonl()) ++same;
    RunConfig other = c1->config;
    other.seed += 1;
    auto o = RunInProcess(c1->prepared.data, c1->prepared.params, other);
    if (o.ok() && a.ok() && o->transcript.ToJsonl() == a->transcript.ToJsonl()) {
      seeds_matter = false;
    }
  }
  Report(9, "determinism", same == kDeterminismRuns && seeds_matter,
         absl::StrFormat("%d/%d repeated runs byte-identical transcripts; different "
                         "seeds %s",
                         same, kDeterminismRuns,
                         seeds_matter ? "give different transcripts" : "COLLIDED"));
}

}  // namespace
}  // namespace ppkm

int main() {
  ppkm::Equivalence();
  ppkm::MaskTransparency();
  ppkm::AttackTableCheck();
  ppkm::SecurityTable();
  ppkm::BoundValidity();
  ppkm::KlMonotonicity();
  ppkm::TransportEquivalence();
  ppkm::CostAccounting();
  ppkm::Determinism();
  return ppkm::failures == 0 ? 0 : 1;
}
