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
#include <limits>
#include <map>
#include <optional>

#include "absl/strings/str_cat.h"
#include "ppkm/keysched.h"
#include "ppkm/messages.h"

namespace ppkm {

absl::StatusOr<ErrorTerms> ComputeErrorTerms(const Point& x1, const Point& x2,
                                             double eps1, double eps2,
                                             const RandomizationParams& params) {
  if (x1.dim() != x2.dim() || x1.dim() != params.dim()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "dimension mismatch: ", x1.dim(), ", ", x2.dim(), ", params ", params.dim()));
  }
  ErrorTerms out;
  for (size_t l = 0; l < x1.dim(); ++l) {
    const double r = params.scale(l);
    const double dx = x1[l] - x2[l];
    const double de = eps1 * x1[l] - eps2 * x2[l];
    const double l2 = 2.0 * r * dx * de;
    out.lambda2.push_back(l2);
    out.lambda1.push_back(de * de + l2);
    out.scaled_sq += r * r * dx * dx;
    out.exact_sq += (r * dx + de) * (r * dx + de);
    out.approx_sq += r * r * dx * dx + l2;
  }
  out.exact_distance = std::sqrt(out.exact_sq);
  out.bound_violation = out.approx_sq < 0.0;
  out.approx_distance = out.bound_violation
                            ? std::numeric_limits<double>::quiet_NaN()
                            : std::sqrt(out.approx_sq);
  return out;
}

absl::StatusOr<double> KdQuotientBound(double x11, double x21, double x31, double x41,
                                       double r1, double eps, int64_t d) {
  const double lower = x11 - x21;
  const double upper = x41 - x31;
  if (lower == 0.0 || upper == 0.0) {
    return absl::InvalidArgumentError("quotient needs x11 != x21 and x41 != x31");
  }
  if (!(r1 > 0.0) || d < 1) {
    return absl::InvalidArgumentError("need r1 > 0 and d >= 1");
  }
  // log((r1 + a) / (r1 - b)) = log1p(a/r1) - log1p(-b/r1); stays accurate for
  // eps far below r1.
  const double a = eps * x41 / upper / r1;
  const double b = eps * x21 / lower / r1;
  if (!(1.0 + a > 0.0) || !(1.0 - b > 0.0)) {
    return absl::OutOfRangeError("eps too large for bound validity");
  }
  return static_cast<double>(d) * (lower / upper) * (std::log1p(a) - std::log1p(-b));
}

SignedKd KdAggregator(double x, double y, double sum_d_over_m) {
  const double v = -std::log(x / y) * sum_d_over_m;
  return {v, std::abs(v)};
}

absl::StatusOr<double> SumDOverM(const std::vector<std::vector<double>>& sums,
                                 std::span<const int64_t> counts) {
  if (sums.size() != counts.size()) {
    return absl::InvalidArgumentError("sums and counts differ in length");
  }
  double total = 0.0;
  for (size_t j = 0; j < sums.size(); ++j) {
    if (counts[j] <= 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("cluster ", j, " has count ", counts[j], "; d/m undefined"));
    }
    for (double v : sums[j]) total += v / static_cast<double>(counts[j]);
  }
  return total;
}

SignedKd KdSameMask(double x1, double x2, double z) {
  const double v = -std::log(x1 / x2) * z;
  return {v, std::abs(v)};
}

nlohmann::json AttackCostReport::ToJson() const {
  return {{"K", K}, {"R", R}, {"c", c}, {"d", d}, {"log2_x", log2_x}};
}

absl::StatusOr<AttackCostReport> AttackCost(double K, double R, double c, int64_t d) {
  if (!(K >= 2.0) || !(R > 0.0) || !(c > 0.0) || d < 1) {
    return absl::InvalidArgumentError("need K >= 2, R > 0, c > 0, d >= 1");
  }
  AttackCostReport out{K, R, c, d, 0.0};
  // C(K, 2) = K (K - 1) / 2.
  out.log2_x = std::log2(K) + std::log2(K - 1.0) - 1.0 +
               static_cast<double>(d) * std::log2(R / c);
  return out;
}

std::vector<AttackTableRow> AttackTable() {
  struct Setting {
    double R, c;
    int64_t d;
    int printed;
  };
  static constexpr Setting kSettings[] = {
      {1000, 0.01, 2, 33},  {1000, 0.01, 3, 49},  {1000, 0.01, 4, 66},
      {10, 0.001, 5, 66},   {10, 0.001, 6, 79},   {10, 0.001, 8, 105},
      {100, 0.01, 9, 118},  {10, 0.001, 10, 132}, {10, 0.001, 12, 158},
      {1000, 0.01, 11, 181},
  };
  std::vector<AttackTableRow> rows;
  for (const Setting& s : kSettings) {
    rows.push_back({*AttackCost(2.0, s.R, s.c, s.d), s.printed});
  }
  return rows;
}

nlohmann::json TranscriptLeakage::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const RoundLeakage& r : rounds) {
    nlohmann::json row = {{"round", r.round},
                          {"x", r.x},
                          {"y", r.y},
                          {"sum_d_over_m", r.sum_d_over_m},
                          {"kd_aggregator_ratio", r.aggregator.value},
                          {"kd_aggregator_ratio_abs", r.aggregator.magnitude}};
    if (r.has_next) {
      row["kd_same_mask"] = r.same_mask.value;
      row["kd_same_mask_abs"] = r.same_mask.magnitude;
    }
    rows.push_back(std::move(row));
  }
  return {{"points", points}, {"rounds", rows}};
}

absl::StatusOr<TranscriptLeakage> AnalyzeTranscript(
    std::span<const std::string> lines) {
  std::optional<RunHeader> header;
  std::optional<RoundKeys> initial;
  int64_t points = 0;
  // round -> server -> share
  std::map<int64_t, std::map<int, SharesMsg>> shares;
  std::map<int64_t, CentroidsMsg> centroids;
  for (size_t i = 0; i < lines.size(); ++i) {
    nlohmann::json line = nlohmann::json::parse(lines[i], nullptr, false);
    if (line.is_discarded() || !line.contains("message")) {
      return absl::InvalidArgumentError(
          absl::StrCat("transcript line ", i + 1, " is not a transcript record"));
    }
    auto env = EnvelopeFromJson(line["message"]);
    if (!env.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("transcript line ", i + 1, ": ", env.status().message()));
    }
    if (const auto* m = std::get_if<HeaderMsg>(&env->payload)) {
      header = m->header;
    } else if (const auto* m = std::get_if<InitMsg>(&env->payload)) {
      if (!initial) initial = m->keys;
      points += static_cast<int64_t>(m->points.size());
    } else if (const auto* m = std::get_if<InsertMsg>(&env->payload)) {
      points += static_cast<int64_t>(m->points.size());
    } else if (const auto* m = std::get_if<SharesMsg>(&env->payload)) {
      shares[m->round][m->server] = *m;
    } else if (const auto* m = std::get_if<CentroidsMsg>(&env->payload)) {
      centroids.emplace(m->round, *m);
    }
  }
  if (!header || !initial) {
    return absl::InvalidArgumentError(
        "transcript lacks the Header and Init messages needed to replay keys");
  }

  TranscriptLeakage out;
  out.points = points;
  KeyChainState chain = KeyChainState::Create(*initial, header->ell1);
  for (const auto& [round, by_server] : shares) {
    if (chain.keys.round != round) {
      return absl::InvalidArgumentError(absl::StrCat(
          "transcript skips from key round ", chain.keys.round, " to ", round));
    }
    RoundLeakage row;
    row.round = round;
    row.x = chain.keys.x;
    row.y = chain.keys.y;
    // d/m = (y/x) * (x d)/(y m), summed over servers' clusters with m > 0.
    for (const auto& [server, share] : by_server) {
      for (size_t j = 0; j < share.masked_counts.size(); ++j) {
        if (share.masked_counts[j] == 0.0) continue;
        for (double v : share.masked_sums[j]) {
          row.sum_d_over_m += (row.y / row.x) * (v / share.masked_counts[j]);
        }
      }
    }
    row.aggregator = KdAggregator(row.x, row.y, row.sum_d_over_m);
    auto c = centroids.find(round);
    if (c != centroids.end()) {
      const double x_now = chain.keys.x;
      NextKeys(chain, CentroidPayloadBytes(c->second));
      row.has_next = true;
      row.same_mask = KdSameMask(x_now, chain.keys.x, static_cast<double>(points));
    }
    out.rounds.push_back(row);
    if (c == centroids.end()) break;
  }
  return out;
}

}  // namespace ppkm
