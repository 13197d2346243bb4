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

#include "ppkm/transport.h"

#include <utility>

#include "absl/strings/str_cat.h"

namespace ppkm {

void Transcript::Append(const std::string& encoded_envelope) {
  // The envelope text is embedded verbatim so the log carries the exact
  // bytes that crossed the channel.
  lines_.push_back(absl::StrCat("{\"seq\":", lines_.size(), ",\"bytes\":",
                                encoded_envelope.size() + 4, ",\"message\":",
                                encoded_envelope, "}"));
}

std::string Transcript::ToJsonl() const {
  std::string out;
  for (const std::string& line : lines_) absl::StrAppend(&out, line, "\n");
  return out;
}

void RecordSend(Actor& from, size_t framed_bytes) {
  ++from.counters().messages_sent;
  from.counters().bytes_sent += static_cast<int64_t>(framed_bytes);
}

void RecordReceive(Actor& to, size_t framed_bytes) {
  ++to.counters().messages_received;
  to.counters().bytes_received += static_cast<int64_t>(framed_bytes);
}

void InProcessBus::Register(Actor* actor) { actors_[actor->endpoint()] = actor; }

void InProcessBus::Post(Envelope envelope) { queue_.push_back(std::move(envelope)); }

void InProcessBus::PostAll(std::vector<Envelope> envelopes) {
  for (Envelope& e : envelopes) queue_.push_back(std::move(e));
}

absl::Status InProcessBus::DeliverOne() {
  if (queue_.empty()) return absl::OkStatus();
  Envelope envelope = std::move(queue_.front());
  queue_.pop_front();
  auto from = actors_.find(envelope.from);
  auto to = actors_.find(envelope.to);
  if (from == actors_.end() || to == actors_.end()) {
    return absl::UnavailableError(absl::StrCat(
        "transport failure: no channel ", envelope.from.Name(), " -> ",
        envelope.to.Name()));
  }
  const std::string text = Encode(envelope);
  const size_t framed = text.size() + 4;
  transcript_.Append(text);
  RecordSend(*from->second, framed);
  RecordReceive(*to->second, framed);
  auto decoded = Decode(text);
  if (!decoded.ok()) return decoded.status();
  auto out = to->second->Handle(*decoded);
  if (!out.ok()) {
    return absl::Status(out.status().code(),
                        absl::StrCat(envelope.to.Name(), " handling ",
                                     PayloadType(envelope.payload), ": ",
                                     out.status().message()));
  }
  PostAll(*std::move(out));
  return absl::OkStatus();
}

absl::Status InProcessBus::DeliverUntil(
    const std::function<bool(const Envelope&)>& stop_before) {
  while (!queue_.empty()) {
    if (stop_before && stop_before(queue_.front())) return absl::OkStatus();
    if (absl::Status s = DeliverOne(); !s.ok()) return s;
  }
  return absl::OkStatus();
}

}  // namespace ppkm
