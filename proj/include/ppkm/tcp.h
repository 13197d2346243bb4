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

#ifndef PPKM_TCP_H_
#define PPKM_TCP_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ppkm/actors.h"
#include "ppkm/messages.h"
#include "ppkm/transport.h"

namespace ppkm {

struct HostPort {
  std::string host = "127.0.0.1";
  uint16_t port = 0;

  std::string ToString() const;
};

absl::StatusOr<HostPort> ParseHostPort(std::string_view text);

// Owning file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }

 private:
  int fd_ = -1;
};

absl::Status WriteFrame(int fd, const std::string& body);
// NotFound on a clean end-of-stream before the first byte.
absl::StatusOr<std::string> ReadFrame(int fd);

// Runs one actor over TCP. Every connection starts with a hello exchange:
// the connecting side sends {"hello":"<endpoint>"} and the accepting side
// answers with its own. After that each connection carries length-prefixed
// envelopes in both directions, one logical channel per direction.
class TcpNode {
 public:
  explicit TcpNode(Actor* actor) : actor_(actor) {}

  // Binds and listens; port 0 picks an ephemeral port.
  absl::Status Listen(const HostPort& address);
  uint16_t port() const { return port_; }

  // Opens a channel to `address`, retrying until `timeout`. The peer must
  // answer with an endpoint of `expected_kind` (and `expected_index` when it
  // is >= 0).
  absl::Status Connect(const HostPort& address, RoleKind expected_kind,
                       int expected_index, std::chrono::milliseconds timeout);

  absl::Status Send(std::vector<Envelope> envelopes);

  // Serves until `done()` holds after handling a message, or the actor is
  // stopped. Fails if nothing arrives for `idle_timeout`.
  absl::Status Run(const std::function<bool()>& done,
                   std::chrono::milliseconds idle_timeout);

  // When set, every envelope this node sends or receives is logged.
  void set_transcript(Transcript* transcript) { transcript_ = transcript; }

 private:
  absl::Status Accept();
  absl::Status HandleReadable(const Endpoint& peer);

  Actor* actor_;
  Socket listener_;
  uint16_t port_ = 0;
  std::map<Endpoint, Socket> peers_;
  Transcript* transcript_ = nullptr;
};

}  // namespace ppkm

#endif  // PPKM_TCP_H_
