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

#include "ppkm/messages.h"

#include <bit>
#include <type_traits>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"

namespace ppkm {
namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json PointsToJson(const std::vector<TransformedPoint>& points) {
  json arr = json::array();
  for (const TransformedPoint& p : points) {
    arr.push_back({{"id", p.id}, {"x", p.coords.coords}});
  }
  return arr;
}

json CentersToJson(const std::vector<Point>& centers) {
  json arr = json::array();
  for (const Point& c : centers) arr.push_back(c.coords);
  return arr;
}

std::vector<TransformedPoint> PointsFromJson(const json& arr) {
  std::vector<TransformedPoint> points;
  for (const json& p : arr) {
    points.push_back(TransformedPoint{p.at("id").get<PointId>(),
                                      Point{p.at("x").get<std::vector<double>>()}});
  }
  return points;
}

std::vector<Point> CentersFromJson(const json& arr) {
  std::vector<Point> centers;
  for (const json& c : arr) centers.push_back(Point{c.get<std::vector<double>>()});
  return centers;
}

json BodyToJson(const Payload& payload) {
  return std::visit(
      Overloaded{
          [](const HeaderMsg& m) -> json {
            return {{"k", m.header.k},
                    {"t", m.header.t},
                    {"d", m.header.d},
                    {"ell1", m.header.ell1},
                    {"max_iters", m.header.max_iters},
                    {"tolerance", m.header.tolerance}};
          },
          [](const InitMsg& m) -> json {
            return {{"server", m.server},
                    {"points", PointsToJson(m.points)},
                    {"centers", CentersToJson(m.centers)},
                    {"keys",
                     {{"x", m.keys.x}, {"y", m.keys.y}, {"round", m.keys.round}}}};
          },
          [](const SharesMsg& m) -> json {
            return {{"server", m.server},
                    {"round", m.round},
                    {"masked_sums", m.masked_sums},
                    {"masked_counts", m.masked_counts}};
          },
          [](const CentroidsMsg& m) -> json {
            return {{"round", m.round},
                    {"scaled_centers", m.scaled_centers},
                    {"empty", m.empty}};
          },
          [](const InsertMsg& m) -> json {
            return {{"points", PointsToJson(m.points)}};
          },
          [](const DoneMsg& m) -> json {
            json labels = json::array();
            for (const auto& [id, label] : m.labels) labels.push_back({id, label});
            return {{"server", m.server},
                    {"iterations", m.iterations},
                    {"converged", m.converged},
                    {"labels", labels},
                    {"centers", CentersToJson(m.centers)}};
          },
          [](const ShutdownMsg&) -> json { return json::object(); },
      },
      payload);
}

absl::StatusOr<Payload> BodyFromJson(const std::string& type, const json& b) {
  if (type == "Header") {
    HeaderMsg m;
    m.header.k = b.at("k").get<int>();
    m.header.t = b.at("t").get<int>();
    m.header.d = b.at("d").get<int>();
    m.header.ell1 = b.at("ell1").get<int>();
    m.header.max_iters = b.at("max_iters").get<int64_t>();
    m.header.tolerance = b.at("tolerance").get<double>();
    return m;
  }
  if (type == "Init") {
    InitMsg m;
    m.server = b.at("server").get<int>();
    m.points = PointsFromJson(b.at("points"));
    m.centers = CentersFromJson(b.at("centers"));
    const json& k = b.at("keys");
    m.keys = RoundKeys{k.at("x").get<double>(), k.at("y").get<double>(),
                       k.at("round").get<int64_t>()};
    return m;
  }
  if (type == "Shares") {
    SharesMsg m;
    m.server = b.at("server").get<int>();
    m.round = b.at("round").get<int64_t>();
    m.masked_sums = b.at("masked_sums").get<std::vector<std::vector<double>>>();
    m.masked_counts = b.at("masked_counts").get<std::vector<double>>();
    return m;
  }
  if (type == "Centroids") {
    CentroidsMsg m;
    m.round = b.at("round").get<int64_t>();
    m.scaled_centers =
        b.at("scaled_centers").get<std::vector<std::vector<double>>>();
    m.empty = b.at("empty").get<std::vector<bool>>();
    return m;
  }
  if (type == "Insert") {
    return InsertMsg{PointsFromJson(b.at("points"))};
  }
  if (type == "Done") {
    DoneMsg m;
    m.server = b.at("server").get<int>();
    m.iterations = b.at("iterations").get<int64_t>();
    m.converged = b.at("converged").get<bool>();
    for (const json& pair : b.at("labels")) {
      m.labels.emplace_back(pair.at(0).get<PointId>(), pair.at(1).get<int>());
    }
    m.centers = CentersFromJson(b.at("centers"));
    return m;
  }
  if (type == "Shutdown") return ShutdownMsg{};
  return absl::InvalidArgumentError(absl::StrCat("unknown message type '", type, "'"));
}

void AppendBe64(std::vector<uint8_t>& out, uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<uint8_t>(v >> shift));
  }
}

}  // namespace

std::string Endpoint::Name() const {
  switch (kind) {
    case RoleKind::kOwner:
      return "owner";
    case RoleKind::kServer:
      return absl::StrCat("server/", index);
    case RoleKind::kAggregator:
      return absl::StrCat("aggregator/", index);
  }
  return "?";
}

absl::StatusOr<Endpoint> ParseEndpoint(const std::string& name) {
  if (name == "owner") return Endpoint::Owner();
  const size_t slash = name.find('/');
  int index = 0;
  if (slash != std::string::npos &&
      absl::SimpleAtoi(name.substr(slash + 1), &index)) {
    const std::string kind = name.substr(0, slash);
    if (kind == "server") return Endpoint::Server(index);
    if (kind == "aggregator") return Endpoint::Aggregator(index);
  }
  return absl::InvalidArgumentError(absl::StrCat("bad endpoint '", name, "'"));
}

std::string PayloadType(const Payload& payload) {
  static constexpr const char* kNames[] = {"Header", "Init",  "Shares",
                                           "Centroids", "Insert", "Done",
                                           "Shutdown"};
  static_assert(std::size(kNames) == std::variant_size_v<Payload>);
  return kNames[payload.index()];
}

json ToJson(const Envelope& envelope) {
  return {{"from", envelope.from.Name()},
          {"to", envelope.to.Name()},
          {"type", PayloadType(envelope.payload)},
          {"body", BodyToJson(envelope.payload)}};
}

absl::StatusOr<Envelope> EnvelopeFromJson(const json& j) {
  try {
    auto from = ParseEndpoint(j.at("from").get<std::string>());
    if (!from.ok()) return from.status();
    auto to = ParseEndpoint(j.at("to").get<std::string>());
    if (!to.ok()) return to.status();
    auto payload = BodyFromJson(j.at("type").get<std::string>(), j.at("body"));
    if (!payload.ok()) return payload.status();
    return Envelope{*from, *to, *std::move(payload)};
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed message: ", e.what()));
  }
}

std::string Encode(const Envelope& envelope) { return ToJson(envelope).dump(); }

absl::StatusOr<Envelope> Decode(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return absl::InvalidArgumentError("message is not JSON");
  return EnvelopeFromJson(j);
}

std::string Frame(const std::string& body) {
  const uint32_t n = static_cast<uint32_t>(body.size());
  std::string out;
  out.reserve(4 + body.size());
  out.push_back(static_cast<char>(n >> 24));
  out.push_back(static_cast<char>(n >> 16));
  out.push_back(static_cast<char>(n >> 8));
  out.push_back(static_cast<char>(n));
  out += body;
  return out;
}

std::vector<uint8_t> CentroidPayloadBytes(const CentroidsMsg& msg) {
  std::vector<uint8_t> out;
  AppendBe64(out, static_cast<uint64_t>(msg.round));
  for (size_t j = 0; j < msg.scaled_centers.size(); ++j) {
    const bool empty = j < msg.empty.size() && msg.empty[j];
    out.push_back(empty ? 1 : 0);
    for (double v : msg.scaled_centers[j]) {
      AppendBe64(out, std::bit_cast<uint64_t>(v));
    }
  }
  return out;
}

}  // namespace ppkm
