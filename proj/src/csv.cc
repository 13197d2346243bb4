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

#include "ppkm/csv.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"

namespace ppkm {
namespace {

bool ParseDouble(absl::string_view cell, double* out) {
  cell = absl::StripAsciiWhitespace(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), *out);
  return ec == std::errc() && ptr == cell.data() + cell.size();
}

bool ParseId(absl::string_view cell, PointId* out) {
  cell = absl::StripAsciiWhitespace(cell);
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), *out);
  return !cell.empty() && ec == std::errc() && ptr == cell.data() + cell.size();
}

}  // namespace

std::string FormatDouble(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

absl::StatusOr<Dataset> ParseCsv(const std::string& text,
                                 const CsvSchema& schema) {
  std::vector<PointId> ids;
  std::vector<Point> points;
  size_t arity = 0;
  int line_number = 0;
  bool header_pending = schema.has_header;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (absl::StripAsciiWhitespace(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<absl::string_view> cells = absl::StrSplit(line, ',');
    if (arity == 0) {
      arity = cells.size();
    } else if (cells.size() != arity) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", line_number, ": expected ", arity, " columns, got ",
          cells.size()));
    }
    if (schema.id_column &&
        (*schema.id_column < 0 ||
         static_cast<size_t>(*schema.id_column) >= cells.size())) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", line_number, ": id column ", *schema.id_column,
          " out of range"));
    }
    Point p;
    PointId id = static_cast<PointId>(points.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      if (schema.id_column && static_cast<int>(c) == *schema.id_column) {
        if (!ParseId(cells[c], &id)) {
          return absl::InvalidArgumentError(absl::StrCat(
              "row ", line_number, ": id '", cells[c], "' is not an integer"));
        }
        continue;
      }
      double v;
      if (!ParseDouble(cells[c], &v)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "row ", line_number, ", column ", c, ": '", cells[c],
            "' is not a number"));
      }
      p.coords.push_back(v);
    }
    ids.push_back(id);
    points.push_back(std::move(p));
  }
  if (points.empty()) {
    return absl::InvalidArgumentError("CSV contains no data rows");
  }
  return Dataset::Create(std::move(ids), std::move(points));
}

absl::StatusOr<Dataset> LoadCsv(const std::string& path,
                                const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseCsv(buffer.str(), schema);
}

std::string FormatCsv(const Dataset& ds) {
  std::string out = "id";
  for (size_t l = 0; l < ds.dim(); ++l) absl::StrAppend(&out, ",x", l);
  out += '\n';
  for (size_t i = 0; i < ds.size(); ++i) {
    absl::StrAppend(&out, ds.id(i));
    for (double v : ds.point(i).coords) absl::StrAppend(&out, ",", FormatDouble(v));
    out += '\n';
  }
  return out;
}

absl::Status WriteCsv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::UnavailableError(absl::StrCat("cannot write ", path));
  out << FormatCsv(ds);
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("short write to ", path));
}

}  // namespace ppkm
