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

#include "ppkm/report.h"

#include <filesystem>
#include <fstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "ppkm/csv.h"

namespace ppkm {

absl::StatusOr<PreparedData> PrepareData(const Dataset& input,
                                         const PrepareOptions& options) {
  bool negative = false;
  for (const Point& p : input.points()) {
    for (double v : p.coords) negative = negative || v < 0.0;
  }
  std::optional<Dataset> data;
  Point offset{std::vector<double>(input.dim(), 0.0)};
  if (negative) {
    auto moved = TranslateNonNegative(input);
    if (!moved.ok()) return moved.status();
    data = std::move(moved->dataset);
    offset = std::move(moved->offset);
  } else {
    data = input;
  }
  absl::StatusOr<BoundReport> bounds = options.mode == BoundMode::kStrict
                                           ? StrictBounds(*data)
                                           : WeakBounds(options.w);
  if (!bounds.ok()) return bounds.status();
  auto params = SampleParams(*data, *bounds, options.sampling);
  if (!params.ok()) return params.status();
  if (options.mode == BoundMode::kStrict) {
    // Report the noise bound for the scales actually drawn.
    bounds->eps_upper = bounds->EpsUpperFor(params->r);
  }
  return PreparedData{*std::move(data), std::move(offset), negative,
                      *std::move(bounds), *std::move(params)};
}

nlohmann::json OracleComparison::ToJson() const {
  return {{"assignments_match", assignments_match},
          {"iterations_equal", iterations_equal},
          {"per_iteration", per_iteration},
          {"first_mismatch_iteration", first_mismatch_iteration},
          {"oracle_iterations", oracle_iterations},
          {"oracle_converged", oracle_converged}};
}

OracleComparison CompareWithOracle(const RunResult& run, const OracleResult& oracle) {
  OracleComparison out;
  out.oracle_iterations = oracle.iterations;
  out.oracle_converged = oracle.converged;
  out.iterations_equal = run.iterations == oracle.iterations;
  out.per_iteration = !run.label_history.empty() || run.iterations == 0;
  bool match = run.labels == oracle.labels;
  if (!run.label_history.empty()) {
    const size_t rounds =
        std::max(run.label_history.size(), oracle.label_history.size());
    for (size_t r = 0; r < rounds; ++r) {
      if (r >= run.label_history.size() || r >= oracle.label_history.size() ||
          run.label_history[r] != oracle.label_history[r]) {
        out.first_mismatch_iteration = static_cast<int64_t>(r + 1);
        match = false;
        break;
      }
    }
  }
  if (!match && out.first_mismatch_iteration < 0) {
    out.first_mismatch_iteration = std::max<int64_t>(run.iterations, 1);
  }
  out.assignments_match = match;
  return out;
}

std::vector<Point> EstimateOriginalCenters(const CentroidSet& transformed,
                                           const RandomizationParams& params,
                                           const Point& offset) {
  std::vector<Point> out;
  for (const Point& c : transformed.centers) {
    Point p{std::vector<double>(c.dim())};
    for (size_t l = 0; l < c.dim(); ++l) {
      p[l] = (c[l] - params.shift(l)) / params.scale(l) + offset[l];
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string FormatLabelsCsv(const ClusterAssignment& labels) {
  std::string out = "id,label\n";
  for (const auto& [id, label] : labels) absl::StrAppend(&out, id, ",", label, "\n");
  return out;
}

namespace {

nlohmann::json PointsJson(const std::vector<Point>& points) {
  nlohmann::json out = nlohmann::json::array();
  for (const Point& p : points) out.push_back(p.coords);
  return out;
}

}  // namespace

nlohmann::json CentersJson(const CentroidSet& transformed,
                           const std::vector<Point>& original) {
  return {{"transformed", PointsJson(transformed.centers)},
          {"original_estimate", PointsJson(original)}};
}

nlohmann::json BuildReport(const ReportInputs& in) {
  const PreparedData& prep = *in.prepared;
  const RunResult& res = *in.result;
  nlohmann::json counters = nlohmann::json::object();
  for (const auto& [endpoint, c] : res.counters) counters[endpoint.Name()] = c.ToJson();
  nlohmann::json report = {
      {"schema_version", kReportSchemaVersion},
      {"transport", in.transport},
      {"config",
       {{"k", in.config.k},
        {"t", in.config.t},
        {"max_iters", in.config.max_iters},
        {"tolerance", in.config.tolerance},
        {"seed", in.config.seed},
        {"partition", std::string(PartitionStrategyName(in.config.partition))},
        {"mode", std::string(BoundModeName(in.prepare.mode))},
        {"w", in.prepare.w},
        {"ell1", in.prepare.sampling.ell1},
        {"ell2", in.prepare.sampling.ell2},
        {"scale_mode", std::string(ScaleModeName(in.prepare.sampling.scale_mode))}}},
      {"n", prep.data.size()},
      {"d", prep.data.dim()},
      {"translated", prep.translated},
      {"bounds",
       {{"r_lower", prep.bounds.r_lower},
        {"eps_upper", prep.bounds.eps_upper},
        {"r_relaxed", prep.bounds.r_relaxed},
        {"eps_max", prep.params.eps_max}}},
      {"iterations", res.iterations},
      {"converged", res.converged},
      {"initial_center_ids", res.initial_center_ids},
      {"empty_cluster_events", res.empty_cluster_events},
      {"share_sizes", res.share_sizes},
      {"counters", counters},
      {"transcript_messages", res.transcript.size()},
  };
  if (in.oracle) report["oracle"] = in.oracle->ToJson();
  return report;
}

absl::Status WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot open ", path));
  out << text;
  out.close();
  if (!out) return absl::UnavailableError(absl::StrCat("write failed: ", path));
  return absl::OkStatus();
}

absl::Status WriteRunOutputs(const std::string& dir, const ReportInputs& in) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  const std::filesystem::path base(dir);
  const RunResult& res = *in.result;
  const std::vector<Point> original =
      EstimateOriginalCenters(res.centers, in.prepared->params, in.prepared->offset);
  if (absl::Status s = WriteTextFile((base / "labels.csv").string(),
                                     FormatLabelsCsv(res.labels));
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteTextFile((base / "centers.json").string(),
                                     CentersJson(res.centers, original).dump(2) + "\n");
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteTextFile((base / "transcript.jsonl").string(),
                                     res.transcript.ToJsonl());
      !s.ok()) {
    return s;
  }
  return WriteTextFile((base / "report.json").string(), BuildReport(in).dump(2) + "\n");
}

}  // namespace ppkm
