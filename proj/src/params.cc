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

#include "ppkm/params.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "ppkm/rng.h"

namespace ppkm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxEll1 = 256;

// Literal triple quotient terms for anchor i, "nearer" j and "farther" k.
double TripleNumerator(const Point& xi, const Point& xk) {
  double sum = 0.0;
  for (size_t l = 0; l < xi.dim(); ++l) {
    const double diff = xi[l] - xk[l];
    sum += xi[l] * xi[l] - diff * diff;
  }
  return sum;
}

double TripleDenominator(const Point& xi, const Point& xj, const Point& xk) {
  double sum = 0.0;
  for (size_t l = 0; l < xi.dim(); ++l) {
    const double dk = xi[l] - xk[l];
    sum += dk * dk - xi[l] * (xi[l] - xj[l]);
  }
  return 2.0 * sum;
}

bool AllIdentical(const Dataset& ds) {
  for (const Point& p : ds.points()) {
    if (p != ds.point(0)) return false;
  }
  return true;
}

std::vector<double> NoiseQuotients(const Dataset& ds) {
  std::vector<double> quotients(ds.dim(), kInf);
  std::vector<double> column(ds.size());
  for (size_t l = 0; l < ds.dim(); ++l) {
    for (size_t i = 0; i < ds.size(); ++i) column[i] = ds.point(i)[l];
    std::sort(column.begin(), column.end());
    // For each value the tightest partner is the next smaller distinct value.
    for (size_t i = 1; i < column.size(); ++i) {
      const double hi = column[i];
      const double lo = column[i - 1];
      if (hi > lo && hi > 0.0) {
        quotients[l] = std::min(quotients[l], (hi - lo) / (2.0 * hi));
      }
    }
  }
  return quotients;
}

struct TripleMax {
  double value = -kInf;
  bool found = false;
};

// Maximum of the triple quotient over distinct (i, j, k) with a positive
// denominator. For fixed (i, k) the denominator is D_k - P_j with
// P_j = sum_l x_il (x_il - x_jl), so only the P_j adjacent to D_k (numerator
// > 0) or the smallest P_j (numerator < 0) can attain the maximum. Candidates
// are re-evaluated with the literal formula.
TripleMax MaxTripleQuotient(const Dataset& ds) {
  const size_t n = ds.size();
  TripleMax best;
  std::vector<std::pair<double, size_t>> p_sorted;
  p_sorted.reserve(n);
  constexpr ptrdiff_t kWindow = 3;
  for (size_t i = 0; i < n; ++i) {
    const Point& xi = ds.point(i);
    p_sorted.clear();
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const Point& xj = ds.point(j);
      double p = 0.0;
      for (size_t l = 0; l < xi.dim(); ++l) p += xi[l] * (xi[l] - xj[l]);
      p_sorted.emplace_back(p, j);
    }
    std::sort(p_sorted.begin(), p_sorted.end());
    const ptrdiff_t m = static_cast<ptrdiff_t>(p_sorted.size());

    auto consider = [&](size_t j, size_t k, double numerator) {
      if (j == k) return;
      const double denominator =
          TripleDenominator(xi, ds.point(j), ds.point(k));
      if (!(denominator > 0.0)) return;
      const double q = numerator / denominator;
      if (!best.found || q > best.value) {
        best.value = q;
        best.found = true;
      }
    };

    for (size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const Point& xk = ds.point(k);
      const double numerator = TripleNumerator(xi, xk);
      double dk = 0.0;
      for (size_t l = 0; l < xi.dim(); ++l) {
        const double diff = xi[l] - xk[l];
        dk += diff * diff;
      }
      if (numerator < 0.0) {
        for (ptrdiff_t s = 0; s < std::min(m, kWindow + 1); ++s) {
          consider(p_sorted[s].second, k, numerator);
        }
      }
      const ptrdiff_t pos = std::lower_bound(
          p_sorted.begin(), p_sorted.end(),
          std::make_pair(dk, size_t{0}),
          [](const auto& a, const auto& b) { return a.first < b.first; }) -
          p_sorted.begin();
      for (ptrdiff_t s = std::max<ptrdiff_t>(0, pos - kWindow);
           s < std::min(m, pos + 2); ++s) {
        consider(p_sorted[s].second, k, numerator);
      }
    }
  }
  return best;
}

}  // namespace

std::string_view BoundModeName(BoundMode mode) {
  return mode == BoundMode::kStrict ? "strict" : "weak";
}

std::string_view ScaleModeName(ScaleMode mode) {
  return mode == ScaleMode::kUniform ? "uniform" : "independent";
}

double BoundReport::EpsUpperFor(std::span<const double> r) const {
  if (mode == BoundMode::kWeak) return w / 2.0;
  double bound = kInf;
  for (size_t l = 0; l < eps_quotients.size() && 2 * l < r.size(); ++l) {
    if (std::isinf(eps_quotients[l])) continue;
    bound = std::min(bound, r[2 * l] * eps_quotients[l]);
  }
  return bound;
}

absl::StatusOr<BoundReport> StrictBounds(const Dataset& ds) {
  std::vector<double> unit(2 * ds.dim(), 1.0);
  return StrictBounds(ds, unit);
}

absl::StatusOr<BoundReport> StrictBounds(const Dataset& ds,
                                         std::span<const double> r) {
  if (r.size() != 2 * ds.dim()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected ", 2 * ds.dim(), " scale/shift values, got ", r.size()));
  }
  for (const Point& p : ds.points()) {
    for (double v : p.coords) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        return absl::InvalidArgumentError(
            "strict bounds need finite non-negative coordinates; translate "
            "the dataset first");
      }
    }
  }
  if (AllIdentical(ds)) {
    return absl::InvalidArgumentError("no admissible triples");
  }
  BoundReport report;
  report.mode = BoundMode::kStrict;
  report.eps_quotients = NoiseQuotients(ds);
  report.eps_upper = report.EpsUpperFor(r);
  if (!(report.eps_upper > 0.0) || std::isinf(report.eps_upper)) {
    return absl::FailedPreconditionError(
        "dataset admits no strict noise bound");
  }
  const TripleMax triple = MaxTripleQuotient(ds);
  if (triple.found) {
    report.r_lower = triple.value;
  } else {
    report.r_relaxed = true;
    report.r_lower = 0.0;
  }
  return report;
}

absl::StatusOr<BoundReport> WeakBounds(double w) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    return absl::InvalidArgumentError("w must be a positive finite number");
  }
  BoundReport report;
  report.mode = BoundMode::kWeak;
  report.w = w;
  report.r_lower = w;
  report.eps_upper = w / 2.0;
  return report;
}

double RandomizationParams::min_scale() const {
  double lo = kInf;
  for (size_t j = 0; j < dim(); ++j) lo = std::min(lo, scale(j));
  return lo;
}

absl::Status RandomizationParams::Validate(size_t n, size_t d) const {
  if (r.size() != 2 * d) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected ", 2 * d, " r values, got ", r.size()));
  }
  if (epsilons.size() != n) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected ", n, " noise values, got ", epsilons.size()));
  }
  for (size_t j = 0; j < d; ++j) {
    if (!(scale(j) > 0.0) || !std::isfinite(scale(j))) {
      return absl::InvalidArgumentError("every scale must be positive");
    }
    // A zero shift is allowed: it gives the identity transform at eps = 0.
    if (!(shift(j) >= 0.0) || !std::isfinite(shift(j))) {
      return absl::InvalidArgumentError("every shift must be non-negative");
    }
  }
  for (double e : epsilons) {
    if (!(e >= 0.0) || (e > 0.0 && !(e < eps_max))) {
      return absl::InvalidArgumentError("noise value outside [0, eps_max)");
    }
  }
  return absl::OkStatus();
}

double NoiseCap(const BoundReport& bounds, std::span<const double> r,
                int ell2) {
  double cap = std::min(bounds.EpsUpperFor(r), std::ldexp(1.0, ell2));
  if (bounds.mode == BoundMode::kStrict && !bounds.r_relaxed &&
      bounds.r_lower > 0.0) {
    double r_min = kInf;
    for (size_t j = 0; 2 * j < r.size(); ++j) r_min = std::min(r_min, r[2 * j]);
    cap = std::min(cap, r_min / bounds.r_lower);
  }
  return cap;
}

std::vector<double> SampleNoise(size_t count, double eps_max, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> eps(count);
  for (double& e : eps) e = rng.Uniform(0.0, eps_max);
  return eps;
}

absl::StatusOr<RandomizationParams> SampleParams(
    const Dataset& ds, const BoundReport& bounds,
    const SamplingOptions& options) {
  if (options.ell1 < 1 || options.ell1 > kMaxEll1) {
    return absl::InvalidArgumentError(
        absl::StrCat("ell1 must be in [1, ", kMaxEll1, "]"));
  }
  if (options.ell2 < 0 || options.ell1 <= options.ell2) {
    return absl::InvalidArgumentError("need ell1 > ell2 >= 0");
  }
  const double hi = std::ldexp(1.0, options.ell1);
  const double lo = std::max(bounds.r_lower, std::ldexp(1.0, options.ell1 - 1));
  if (!(lo < hi)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "ell1 too small for bound: r_lower = ", bounds.r_lower, " >= 2^",
        options.ell1));
  }
  const size_t d = ds.dim();
  RandomizationParams params;
  params.r.resize(2 * d);
  Rng scale_rng(DeriveSeed(options.seed, SeedStream::kScales));
  const double common_scale = scale_rng.Uniform(lo, hi);
  for (size_t j = 0; j < d; ++j) {
    params.r[2 * j] = options.scale_mode == ScaleMode::kUniform
                          ? common_scale
                          : scale_rng.Uniform(lo, hi);
    params.r[2 * j + 1] = scale_rng.Uniform(std::ldexp(1.0, options.ell1 - 1), hi);
  }
  params.eps_max = NoiseCap(bounds, params.r, options.ell2);
  if (!(params.eps_max > 0.0) || !std::isfinite(params.eps_max)) {
    return absl::FailedPreconditionError("no admissible noise range");
  }
  params.epsilons = SampleNoise(ds.size(), params.eps_max,
                                DeriveSeed(options.seed, SeedStream::kNoise));
  return params;
}

double Log2Binomial(uint64_t n, uint64_t k) {
  if (k > n) return -kInf;
  k = std::min(k, n - k);
  double sum = 0.0;
  for (uint64_t i = 0; i < k; ++i) {
    sum += std::log2(static_cast<double>(n - i)) -
           std::log2(static_cast<double>(i + 1));
  }
  return sum;
}

SecurityPlan MakeSecurityPlan(uint64_t n, uint64_t d, int ell1, int ell2) {
  SecurityPlan plan;
  plan.n = n;
  plan.d = d;
  plan.ell1 = ell1;
  plan.ell2 = ell2;
  plan.log2_p_guess_point = Log2Binomial(2 * d, 2) +
                            std::log2(static_cast<double>(n)) - 2.0 * ell1 -
                            ell2;
  plan.log2_p_guess_quotient = std::log2(static_cast<double>(2 * d)) +
                               Log2Binomial(n, 3) - ell1 - 3.0 * ell2;
  plan.ell1_exceeds_ell2 = ell1 > ell2;
  plan.secure = plan.log2_p_guess_point <= kSecurityTargetLog2 &&
                plan.log2_p_guess_quotient <= kSecurityTargetLog2;
  return plan;
}

BitLengthThresholds RequiredBitLengths(uint64_t n, uint64_t d,
                                       double log2_target) {
  const SecurityPlan zero = MakeSecurityPlan(n, d, 0, 0);
  return {zero.log2_p_guess_point - log2_target,
          zero.log2_p_guess_quotient - log2_target};
}

}  // namespace ppkm
