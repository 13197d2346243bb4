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

#ifndef PPKM_CSV_H_
#define PPKM_CSV_H_

#include <optional>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ppkm/core.h"

namespace ppkm {

struct CsvSchema {
  bool has_header = false;
  // Zero-based column holding integer point ids. Without it ids are the
  // zero-based data row index.
  std::optional<int> id_column;
};

absl::StatusOr<Dataset> LoadCsv(const std::string& path,
                                const CsvSchema& schema = {});
absl::StatusOr<Dataset> ParseCsv(const std::string& text,
                                 const CsvSchema& schema = {});

// Writes ids in column 0 followed by the coordinates, with a header row.
// Reading it back needs {has_header = true, id_column = 0}.
absl::Status WriteCsv(const std::string& path, const Dataset& ds);
std::string FormatCsv(const Dataset& ds);

// Shortest decimal that round-trips to the same double.
std::string FormatDouble(double v);

}  // namespace ppkm

#endif  // PPKM_CSV_H_
