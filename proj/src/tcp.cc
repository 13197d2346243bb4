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

#include "ppkm/tcp.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"

namespace ppkm {
namespace {

absl::Status ErrnoError(std::string_view what) {
  return absl::UnavailableError(
      absl::StrCat("transport failure: ", std::string(what), ": ", std::strerror(errno)));
}

absl::Status WriteAll(int fd, const char* data, size_t size) {
  while (size > 0) {
    const ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return ErrnoError("send");
    }
    data += n;
    size -= static_cast<size_t>(n);
  }
  return absl::OkStatus();
}

// Returns false on end-of-stream before any byte was read.
absl::StatusOr<bool> ReadAll(int fd, char* data, size_t size) {
  size_t got = 0;
  while (got < size) {
    const ssize_t n = ::recv(fd, data + got, size - got, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      return ErrnoError("recv");
    }
    if (n == 0) {
      if (got == 0) return false;
      return absl::UnavailableError("transport failure: truncated frame");
    }
    got += static_cast<size_t>(n);
  }
  return true;
}

absl::StatusOr<sockaddr_in> Resolve(const HostPort& address) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const int rc = ::getaddrinfo(address.host.c_str(), nullptr, &hints, &result);
  if (rc != 0 || result == nullptr) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot resolve ", address.host, ": ", gai_strerror(rc)));
  }
  sockaddr_in sa = *reinterpret_cast<sockaddr_in*>(result->ai_addr);
  ::freeaddrinfo(result);
  sa.sin_port = htons(address.port);
  return sa;
}

std::string HelloFrame(const Endpoint& self) {
  return nlohmann::json{{"hello", self.Name()}}.dump();
}

absl::StatusOr<Endpoint> ParseHello(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("hello") ||
      !j["hello"].is_string()) {
    return absl::InvalidArgumentError("transport failure: bad hello frame");
  }
  return ParseEndpoint(j["hello"].get<std::string>());
}

constexpr uint32_t kMaxFrame = 1u << 30;

}  // namespace

std::string HostPort::ToString() const { return absl::StrCat(host, ":", port); }

absl::StatusOr<HostPort> ParseHostPort(std::string_view text) {
  const size_t colon = text.rfind(':');
  uint32_t port = 0;
  if (colon == std::string_view::npos || colon == 0 ||
      !absl::SimpleAtoi(std::string(text.substr(colon + 1)), &port) || port > 65535) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected host:port, got '", std::string(text), "'"));
  }
  return HostPort{std::string(text.substr(0, colon)), static_cast<uint16_t>(port)};
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Socket::~Socket() {
  if (fd_ >= 0) ::close(fd_);
}

absl::Status WriteFrame(int fd, const std::string& body) {
  const std::string framed = Frame(body);
  return WriteAll(fd, framed.data(), framed.size());
}

absl::StatusOr<std::string> ReadFrame(int fd) {
  unsigned char prefix[4];
  auto first = ReadAll(fd, reinterpret_cast<char*>(prefix), 4);
  if (!first.ok()) return first.status();
  if (!*first) return absl::NotFoundError("end of stream");
  const uint32_t size = (uint32_t{prefix[0]} << 24) | (uint32_t{prefix[1]} << 16) |
                        (uint32_t{prefix[2]} << 8) | uint32_t{prefix[3]};
  if (size > kMaxFrame) {
    return absl::InvalidArgumentError("transport failure: oversized frame");
  }
  std::string body(size, '\0');
  if (size > 0) {
    auto rest = ReadAll(fd, body.data(), size);
    if (!rest.ok()) return rest.status();
    if (!*rest) return absl::UnavailableError("transport failure: truncated frame");
  }
  return body;
}

absl::Status TcpNode::Listen(const HostPort& address) {
  auto sa = Resolve(address);
  if (!sa.ok()) return sa.status();
  Socket s(::socket(AF_INET, SOCK_STREAM, 0));
  if (!s.valid()) return ErrnoError("socket");
  const int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&*sa), sizeof(*sa)) != 0) {
    return ErrnoError(absl::StrCat("bind ", address.ToString()));
  }
  if (::listen(s.fd(), 16) != 0) return ErrnoError("listen");
  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
  port_ = ntohs(bound.sin_port);
  listener_ = std::move(s);
  return absl::OkStatus();
}

absl::Status TcpNode::Connect(const HostPort& address, RoleKind expected_kind,
                              int expected_index,
                              std::chrono::milliseconds timeout) {
  auto sa = Resolve(address);
  if (!sa.ok()) return sa.status();
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  Socket s;
  for (;;) {
    s = Socket(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) return ErrnoError("socket");
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&*sa), sizeof(*sa)) == 0) {
      break;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      return ErrnoError(absl::StrCat(actor_->endpoint().Name(), " connecting to ",
                                     address.ToString()));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  if (absl::Status st = WriteFrame(s.fd(), HelloFrame(actor_->endpoint())); !st.ok()) {
    return st;
  }
  auto reply = ReadFrame(s.fd());
  if (!reply.ok()) return reply.status();
  auto peer = ParseHello(*reply);
  if (!peer.ok()) return peer.status();
  if (peer->kind != expected_kind ||
      (expected_index >= 0 && peer->index != expected_index)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "transport failure: ", address.ToString(), " is ", peer->Name()));
  }
  peers_[*peer] = std::move(s);
  return absl::OkStatus();
}

absl::Status TcpNode::Accept() {
  Socket s(::accept(listener_.fd(), nullptr, nullptr));
  if (!s.valid()) return ErrnoError("accept");
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  auto hello = ReadFrame(s.fd());
  if (!hello.ok()) return hello.status();
  auto peer = ParseHello(*hello);
  if (!peer.ok()) return peer.status();
  if (absl::Status st = WriteFrame(s.fd(), HelloFrame(actor_->endpoint())); !st.ok()) {
    return st;
  }
  peers_[*peer] = std::move(s);
  return absl::OkStatus();
}

absl::Status TcpNode::Send(std::vector<Envelope> envelopes) {
  for (const Envelope& e : envelopes) {
    auto it = peers_.find(e.to);
    if (it == peers_.end()) {
      return absl::UnavailableError(absl::StrCat(
          "transport failure: ", actor_->endpoint().Name(), " has no channel to ",
          e.to.Name()));
    }
    const std::string text = Encode(e);
    if (transcript_ != nullptr) transcript_->Append(text);
    RecordSend(*actor_, text.size() + 4);
    if (absl::Status s = WriteFrame(it->second.fd(), text); !s.ok()) {
      return absl::Status(s.code(), absl::StrCat(actor_->endpoint().Name(), " -> ",
                                                 e.to.Name(), ": ", s.message()));
    }
  }
  return absl::OkStatus();
}

absl::Status TcpNode::HandleReadable(const Endpoint& peer) {
  auto text = ReadFrame(peers_[peer].fd());
  if (!text.ok()) {
    if (absl::IsNotFound(text.status())) {
      peers_.erase(peer);
      // Servers and the aggregator hang up once they are shut down, possibly
      // before this node has read its own Shutdown. Only the owner's channel
      // (or any channel, from the owner's side) must stay up.
      if (actor_->stopped() || (peer.kind != RoleKind::kOwner &&
                                actor_->endpoint().kind != RoleKind::kOwner)) {
        return absl::OkStatus();
      }
      return absl::UnavailableError(absl::StrCat(
          "transport failure: ", peer.Name(), " closed its channel to ",
          actor_->endpoint().Name()));
    }
    return text.status();
  }
  auto envelope = Decode(*text);
  if (!envelope.ok()) return envelope.status();
  if (transcript_ != nullptr) transcript_->Append(*text);
  RecordReceive(*actor_, text->size() + 4);
  auto out = actor_->Handle(*envelope);
  if (!out.ok()) {
    return absl::Status(out.status().code(),
                        absl::StrCat(actor_->endpoint().Name(), " handling ",
                                     PayloadType(envelope->payload), ": ",
                                     out.status().message()));
  }
  return Send(*std::move(out));
}

absl::Status TcpNode::Run(const std::function<bool()>& done,
                          std::chrono::milliseconds idle_timeout) {
  while (!actor_->stopped() && !(done && done())) {
    std::vector<pollfd> fds;
    std::vector<Endpoint> owners;
    if (listener_.valid()) {
      fds.push_back({listener_.fd(), POLLIN, 0});
      owners.push_back(actor_->endpoint());
    }
    for (const auto& [peer, socket] : peers_) {
      fds.push_back({socket.fd(), POLLIN, 0});
      owners.push_back(peer);
    }
    const int rc = ::poll(fds.data(), fds.size(), static_cast<int>(idle_timeout.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      return ErrnoError("poll");
    }
    if (rc == 0) {
      return absl::DeadlineExceededError(absl::StrCat(
          "transport failure: ", actor_->endpoint().Name(), " idle for ",
          idle_timeout.count(), " ms"));
    }
    for (size_t i = 0; i < fds.size(); ++i) {
      if ((fds[i].revents & (POLLIN | POLLHUP | POLLERR)) == 0) continue;
      absl::Status s = (listener_.valid() && fds[i].fd == listener_.fd())
                           ? Accept()
                           : HandleReadable(owners[i]);
      if (!s.ok()) return s;
      // A handled message may have changed the peer set; re-poll.
      break;
    }
  }
  return absl::OkStatus();
}

}  // namespace ppkm
