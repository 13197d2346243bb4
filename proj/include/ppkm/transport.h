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

#ifndef PPKM_TRANSPORT_H_
#define PPKM_TRANSPORT_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ppkm/actors.h"
#include "ppkm/messages.h"

namespace ppkm {

// Ordered message log. Each line is one JSON object:
//   {"seq": N, "bytes": B, "message": <envelope>}
// where B is the framed size on the wire.
class Transcript {
 public:
  void Append(const std::string& encoded_envelope);
  const std::vector<std::string>& lines() const { return lines_; }
  std::string ToJsonl() const;
  size_t size() const { return lines_.size(); }

 private:
  std::vector<std::string> lines_;
};

// Bookkeeping shared by every transport: bytes and message counts.
void RecordSend(Actor& from, size_t framed_bytes);
void RecordReceive(Actor& to, size_t framed_bytes);

// Deterministic in-process transport. A single FIFO queue; every message is
// serialized and parsed back exactly as on the TCP transport, so both see the
// same values.
class InProcessBus {
 public:
  void Register(Actor* actor);
  void Post(Envelope envelope);
  void PostAll(std::vector<Envelope> envelopes);

  bool idle() const { return queue_.empty(); }
  const std::deque<Envelope>& pending() const { return queue_; }

  // Delivers the front message. Handler errors come back annotated with the
  // receiving role.
  absl::Status DeliverOne();
  // Delivers until idle or until `stop_before(front)` is true.
  absl::Status DeliverUntil(const std::function<bool(const Envelope&)>& stop_before);

  const Transcript& transcript() const { return transcript_; }

 private:
  std::map<Endpoint, Actor*> actors_;
  std::deque<Envelope> queue_;
  Transcript transcript_;
};

}  // namespace ppkm

#endif  // PPKM_TRANSPORT_H_
