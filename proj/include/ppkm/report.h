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

#ifndef PPKM_REPORT_H_
#define PPKM_REPORT_H_

#include <cstdint>
#include <optional>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "json.hpp"
#include "ppkm/core.h"
#include "ppkm/oracle.h"
#include "ppkm/params.h"
#include "ppkm/session.h"

namespace ppkm {

inline constexpr int kReportSchemaVersion = 1;

struct PrepareOptions {
  BoundMode mode = BoundMode::kStrict;
  double w = 1.0;  // weak mode only
  SamplingOptions sampling;
};

// The dataset as handed to the randomizer plus its parameters. Data with a
// negative coordinate is translated so every attribute starts at 0; `offset`
// maps back (zero when nothing moved).
struct PreparedData {
  Dataset data;
  Point offset;
  bool translated = false;
  BoundReport bounds;
  RandomizationParams params;
};

absl::StatusOr<PreparedData> PrepareData(const Dataset& input,
                                         const PrepareOptions& options);

struct OracleComparison {
  bool assignments_match = false;
  bool iterations_equal = false;
  // True when every iteration's labels were compared, not just the final ones.
  bool per_iteration = false;
  int64_t first_mismatch_iteration = -1;  // 1-based; -1 when none
  int64_t oracle_iterations = 0;
  bool oracle_converged = false;

  nlohmann::json ToJson() const;
};

OracleComparison CompareWithOracle(const RunResult& run, const OracleResult& oracle);

// Centers back in input coordinates: (c' - shift) / scale + offset. Exact up
// to the noise folded into each center.
std::vector<Point> EstimateOriginalCenters(const CentroidSet& transformed,
                                           const RandomizationParams& params,
                                           const Point& offset);

std::string FormatLabelsCsv(const ClusterAssignment& labels);
nlohmann::json CentersJson(const CentroidSet& transformed,
                           const std::vector<Point>& original);

struct ReportInputs {
  std::string transport;  // "in-process" or "tcp"
  RunConfig config;
  PrepareOptions prepare;
  const PreparedData* prepared = nullptr;
  const RunResult* result = nullptr;
  std::optional<OracleComparison> oracle;
};

nlohmann::json BuildReport(const ReportInputs& in);

// labels.csv, centers.json, transcript.jsonl and report.json under `dir`.
absl::Status WriteRunOutputs(const std::string& dir, const ReportInputs& in);

absl::Status WriteTextFile(const std::string& path, const std::string& text);

}  // namespace ppkm

#endif  // PPKM_REPORT_H_
