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

#include "ppkm/session.h"

#include <future>

#include "absl/strings/str_cat.h"

namespace ppkm {
namespace {

bool IsSharesAtOrAfter(const Envelope& e, int64_t round) {
  const auto* s = std::get_if<SharesMsg>(&e.payload);
  return s != nullptr && s->round >= round;
}

void FillOwnerResult(const Owner& owner, RunResult& result) {
  result.labels = owner.labels();
  result.centers = owner.centers();
  result.iterations = owner.iterations();
  result.converged = owner.converged();
  result.initial_center_ids = owner.initial_center_ids();
}

}  // namespace

absl::StatusOr<std::unique_ptr<InProcessRun>> InProcessRun::Create(
    Dataset dataset, RandomizationParams params, const RunConfig& config) {
  auto owner = Owner::Create(std::move(dataset), std::move(params), config);
  if (!owner.ok()) return owner.status();
  std::unique_ptr<InProcessRun> run(new InProcessRun());
  run->owner_ = *std::move(owner);
  run->bus_.Register(run->owner_.get());
  for (int i = 1; i < config.t; ++i) {
    run->servers_.push_back(std::make_unique<ComputeServer>(i));
    run->bus_.Register(run->servers_.back().get());
  }
  run->aggregator_ = std::make_unique<Aggregator>(config.t);
  run->bus_.Register(run->aggregator_.get());
  return run;
}

absl::Status InProcessRun::Start() {
  if (started_) return absl::FailedPreconditionError("run already started");
  started_ = true;
  auto out = owner_->Start();
  if (!out.ok()) return out.status();
  bus_.PostAll(*std::move(out));
  return bus_.DeliverUntil(
      [](const Envelope& e) { return IsSharesAtOrAfter(e, 1); });
}

bool InProcessRun::finished() const { return owner_->complete() && bus_.idle(); }

absl::Status InProcessRun::DeliverThroughRound(int64_t round) {
  return bus_.DeliverUntil(
      [round](const Envelope& e) { return IsSharesAtOrAfter(e, round + 1); });
}

absl::StatusOr<bool> InProcessRun::AdvanceRound() {
  if (!started_) {
    if (absl::Status s = Start(); !s.ok()) return s;
  }
  if (finished()) return true;
  const int64_t round = rounds_completed_ + 1;
  if (absl::Status s = DeliverThroughRound(round); !s.ok()) return s;
  rounds_completed_ = round;
  return finished();
}

absl::Status InProcessRun::InsertPoints(std::span<const Point> points,
                                        std::span<const PointId> ids) {
  if (!started_) return absl::FailedPreconditionError("run not started");
  for (const auto& server : servers_) {
    if (server->done()) {
      return absl::FailedPreconditionError(
          "run already converged; start a new run to add points");
    }
  }
  auto out = owner_->Insert(points, ids);
  if (!out.ok()) return out.status();
  bus_.PostAll(*std::move(out));
  return absl::OkStatus();
}

absl::StatusOr<RunResult> InProcessRun::Finish() {
  if (!started_) {
    if (absl::Status s = Start(); !s.ok()) return s;
  }
  if (absl::Status s = bus_.DeliverUntil(nullptr); !s.ok()) return s;
  if (!owner_->complete()) {
    return absl::InternalError("run stalled before every server reported");
  }
  RunResult result;
  FillOwnerResult(*owner_, result);
  result.transcript = bus_.transcript();
  result.counters.emplace_back(owner_->endpoint(), owner_->counters());
  for (const auto& server : servers_) {
    result.counters.emplace_back(server->endpoint(), server->counters());
    result.share_sizes.push_back(server->share_size());
    result.key_history.push_back(server->key_history());
  }
  result.counters.emplace_back(aggregator_->endpoint(), aggregator_->counters());
  result.empty_cluster_events = servers_.front()->empty_cluster_events();
  const size_t rounds = servers_.front()->label_history().size();
  result.label_history.resize(rounds);
  for (const auto& server : servers_) {
    const auto& history = server->label_history();
    for (size_t r = 0; r < history.size() && r < rounds; ++r) {
      result.label_history[r].insert(history[r].begin(), history[r].end());
    }
  }
  result.center_history = servers_.front()->center_history();
  return result;
}

absl::StatusOr<RunResult> RunInProcess(Dataset dataset, RandomizationParams params,
                                       const RunConfig& config) {
  auto run = InProcessRun::Create(std::move(dataset), std::move(params), config);
  if (!run.ok()) return run.status();
  return (*run)->Finish();
}

absl::StatusOr<RunResult> RunOverTcp(Dataset dataset, RandomizationParams params,
                                     const RunConfig& config,
                                     const TcpTopology& topology) {
  if (topology.servers.size() != static_cast<size_t>(config.t - 1)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "t = ", config.t, " needs ", config.t - 1, " server addresses, got ",
        topology.servers.size()));
  }
  auto owner = Owner::Create(std::move(dataset), std::move(params), config);
  if (!owner.ok()) return owner.status();
  RunResult result;
  TcpNode node(owner->get());
  node.set_transcript(&result.transcript);
  for (size_t i = 0; i < topology.servers.size(); ++i) {
    if (absl::Status s = node.Connect(topology.servers[i], RoleKind::kServer,
                                      static_cast<int>(i + 1),
                                      topology.connect_timeout);
        !s.ok()) {
      return s;
    }
  }
  if (absl::Status s = node.Connect(topology.aggregator, RoleKind::kAggregator,
                                    config.t, topology.connect_timeout);
      !s.ok()) {
    return s;
  }
  auto out = (*owner)->Start();
  if (!out.ok()) return out.status();
  if (absl::Status s = node.Send(*std::move(out)); !s.ok()) return s;
  const Owner* owner_ptr = owner->get();
  if (absl::Status s = node.Run([owner_ptr] { return owner_ptr->complete(); },
                                topology.idle_timeout);
      !s.ok()) {
    return s;
  }
  FillOwnerResult(**owner, result);
  result.counters.emplace_back((*owner)->endpoint(), (*owner)->counters());
  return result;
}

absl::Status ServeRole(const ServeOptions& options,
                       const std::function<void(uint16_t)>& on_listening) {
  std::unique_ptr<Actor> actor;
  if (options.role == RoleKind::kServer) {
    actor = std::make_unique<ComputeServer>(options.index);
  } else if (options.role == RoleKind::kAggregator) {
    actor = std::make_unique<Aggregator>(options.index);
  } else {
    return absl::InvalidArgumentError("only servers and the aggregator can be served");
  }
  TcpNode node(actor.get());
  if (absl::Status s = node.Listen(options.listen); !s.ok()) return s;
  if (on_listening) on_listening(node.port());
  if (options.role == RoleKind::kServer) {
    if (absl::Status s = node.Connect(options.aggregator, RoleKind::kAggregator, -1,
                                      options.connect_timeout);
        !s.ok()) {
      return s;
    }
  }
  return node.Run(nullptr, options.idle_timeout);
}

absl::StatusOr<std::unique_ptr<LocalTcpCluster>> LocalTcpCluster::Start(int t) {
  if (t < 2) return absl::InvalidArgumentError("need t >= 2");
  std::unique_ptr<LocalTcpCluster> cluster(new LocalTcpCluster());
  cluster->results_.assign(static_cast<size_t>(t), absl::OkStatus());

  auto launch = [&cluster](size_t slot, ServeOptions options) -> absl::StatusOr<uint16_t> {
    auto port = std::make_shared<std::promise<uint16_t>>();
    std::future<uint16_t> bound = port->get_future();
    LocalTcpCluster* raw = cluster.get();
    cluster->threads_.emplace_back([raw, slot, options, port] {
      bool reported = false;
      absl::Status s = ServeRole(options, [&](uint16_t p) {
        reported = true;
        port->set_value(p);
      });
      if (!reported) port->set_value(0);
      raw->results_[slot] = s;
    });
    const uint16_t p = bound.get();
    if (p == 0) return absl::UnavailableError("role failed to listen");
    return p;
  };

  ServeOptions aggregator;
  aggregator.role = RoleKind::kAggregator;
  aggregator.index = t;
  auto aggregator_port = launch(0, aggregator);
  if (!aggregator_port.ok()) return aggregator_port.status();
  cluster->topology_.aggregator = HostPort{"127.0.0.1", *aggregator_port};
  for (int i = 1; i < t; ++i) {
    ServeOptions server;
    server.role = RoleKind::kServer;
    server.index = i;
    server.aggregator = cluster->topology_.aggregator;
    auto port = launch(static_cast<size_t>(i), server);
    if (!port.ok()) return port.status();
    cluster->topology_.servers.push_back(HostPort{"127.0.0.1", *port});
  }
  return cluster;
}

absl::Status LocalTcpCluster::Join() {
  if (!joined_) {
    for (std::thread& th : threads_) th.join();
    joined_ = true;
  }
  for (const absl::Status& s : results_) {
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

LocalTcpCluster::~LocalTcpCluster() {
  // Roles exit on Shutdown or after their idle timeout.
  for (std::thread& th : threads_) {
    if (th.joinable()) th.join();
  }
}

}  // namespace ppkm
