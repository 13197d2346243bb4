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

#ifndef PPKM_MESSAGES_H_
#define PPKM_MESSAGES_H_

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "ppkm/core.h"
#include "ppkm/keysched.h"
#include "ppkm/transform.h"

namespace ppkm {

enum class RoleKind { kOwner, kServer, kAggregator };

// Owner is index 0, compute servers 1..t-1, the aggregator t.
struct Endpoint {
  RoleKind kind = RoleKind::kOwner;
  int index = 0;

  static Endpoint Owner() { return {RoleKind::kOwner, 0}; }
  static Endpoint Server(int i) { return {RoleKind::kServer, i}; }
  static Endpoint Aggregator(int t) { return {RoleKind::kAggregator, t}; }

  std::string Name() const;

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

absl::StatusOr<Endpoint> ParseEndpoint(const std::string& name);

// Public, non-sensitive run shape sent to every server.
struct RunHeader {
  int k = 0;
  int t = 0;
  int d = 0;
  int ell1 = 64;
  int64_t max_iters = 0;
  double tolerance = 0.0;

  friend bool operator==(const RunHeader&, const RunHeader&) = default;
};

struct HeaderMsg {
  RunHeader header;
};

// Owner -> compute server: the server's share, the initial centers and the
// round-1 keys.
struct InitMsg {
  int server = 0;
  std::vector<TransformedPoint> points;
  std::vector<Point> centers;
  RoundKeys keys;
};

// Compute server -> aggregator: x * d_ij and y * m_ij for every cluster j.
struct SharesMsg {
  int server = 0;
  int64_t round = 0;
  std::vector<std::vector<double>> masked_sums;
  std::vector<double> masked_counts;
};

// Aggregator -> compute servers: sum_i(x d_ij) / sum_i(y m_ij). Clusters with
// a zero denominator are flagged empty and carry no value.
struct CentroidsMsg {
  int64_t round = 0;
  std::vector<std::vector<double>> scaled_centers;
  std::vector<bool> empty;
};

// Owner -> compute server: late points joining at the next iteration.
struct InsertMsg {
  std::vector<TransformedPoint> points;
};

// Compute server -> owner: final labels of the server's share.
struct DoneMsg {
  int server = 0;
  int64_t iterations = 0;
  bool converged = false;
  std::vector<std::pair<PointId, int>> labels;
  std::vector<Point> centers;
};

struct ShutdownMsg {};

using Payload = std::variant<HeaderMsg, InitMsg, SharesMsg, CentroidsMsg,
                             InsertMsg, DoneMsg, ShutdownMsg>;

std::string PayloadType(const Payload& payload);

struct Envelope {
  Endpoint from;
  Endpoint to;
  Payload payload;
};

nlohmann::json ToJson(const Envelope& envelope);
absl::StatusOr<Envelope> EnvelopeFromJson(const nlohmann::json& j);

// Compact JSON text of the envelope; doubles use shortest round-trip form.
std::string Encode(const Envelope& envelope);
absl::StatusOr<Envelope> Decode(const std::string& text);

// 4-byte big-endian length prefix followed by the body.
std::string Frame(const std::string& body);

// Canonical bytes of a Centroids message fed to the key chain: be64 round,
// then per cluster one empty-flag byte and the big-endian IEEE-754 bits of
// each scaled coordinate.
std::vector<uint8_t> CentroidPayloadBytes(const CentroidsMsg& msg);

}  // namespace ppkm

#endif  // PPKM_MESSAGES_H_
