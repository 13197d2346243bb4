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

#ifndef PPKM_SESSION_H_
#define PPKM_SESSION_H_

#include <chrono>
#include <functional>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ppkm/actors.h"
#include "ppkm/core.h"
#include "ppkm/params.h"
#include "ppkm/tcp.h"
#include "ppkm/transport.h"

namespace ppkm {

using RunConfig = OwnerOptions;

struct RunResult {
  ClusterAssignment labels;
  CentroidSet centers;  // transformed space
  int64_t iterations = 0;
  bool converged = false;
  std::vector<PointId> initial_center_ids;
  Transcript transcript;
  std::vector<std::pair<Endpoint, RoleCounters>> counters;
  std::vector<size_t> share_sizes;  // per compute server, at the end
  int64_t empty_cluster_events = 0;

  // In-process runs only. label_history[r] merges every server's labels of
  // round r + 1; center_history[r] are the centers that round assigned
  // against; key_history[r] its keys, as held by server 1.
  std::vector<ClusterAssignment> label_history;
  std::vector<std::vector<Point>> center_history;
  std::vector<std::vector<RoundKeys>> key_history;  // [server][round]
};

// A protocol run on the deterministic in-process transport. Supports
// stepping round by round and inserting points mid-run.
class InProcessRun {
 public:
  static absl::StatusOr<std::unique_ptr<InProcessRun>> Create(
      Dataset dataset, RandomizationParams params, const RunConfig& config);

  // Delivers Header/Init and stops once every round-1 share is queued.
  absl::Status Start();
  // Completes the next round. Returns true once the run has finished.
  absl::StatusOr<bool> AdvanceRound();
  // Late points join at the next iteration. Fails once any server is done.
  absl::Status InsertPoints(std::span<const Point> points,
                            std::span<const PointId> ids);
  // Runs to completion.
  absl::StatusOr<RunResult> Finish();

  bool finished() const;
  int64_t rounds_completed() const { return rounds_completed_; }
  const Transcript& transcript() const { return bus_.transcript(); }
  const Owner& owner() const { return *owner_; }
  const ComputeServer& server(int i) const { return *servers_[i - 1]; }
  const Aggregator& aggregator() const { return *aggregator_; }

 private:
  InProcessRun() = default;
  absl::Status DeliverThroughRound(int64_t round);

  std::unique_ptr<Owner> owner_;
  std::vector<std::unique_ptr<ComputeServer>> servers_;
  std::unique_ptr<Aggregator> aggregator_;
  InProcessBus bus_;
  bool started_ = false;
  int64_t rounds_completed_ = 0;
};

absl::StatusOr<RunResult> RunInProcess(Dataset dataset, RandomizationParams params,
                                       const RunConfig& config);

struct TcpTopology {
  std::vector<HostPort> servers;  // compute servers 1..t-1 in order
  HostPort aggregator;
  std::chrono::milliseconds connect_timeout{10000};
  std::chrono::milliseconds idle_timeout{60000};
};

// Runs the owner in this process against already-running server processes.
// The transcript holds only the owner's own traffic.
absl::StatusOr<RunResult> RunOverTcp(Dataset dataset, RandomizationParams params,
                                     const RunConfig& config,
                                     const TcpTopology& topology);

// Serves one compute server or the aggregator until Shutdown.
struct ServeOptions {
  RoleKind role = RoleKind::kServer;
  int index = 1;  // server index, or t for the aggregator
  HostPort listen;
  HostPort aggregator;  // compute servers only
  std::chrono::milliseconds connect_timeout{10000};
  std::chrono::milliseconds idle_timeout{60000};
};

// Binds first, then reports the bound port through `on_listening` before
// connecting and serving.
absl::Status ServeRole(const ServeOptions& options,
                       const std::function<void(uint16_t)>& on_listening = {});

// t - 1 compute servers and an aggregator on loopback, each on its own thread
// with its own TCP listener.
class LocalTcpCluster {
 public:
  static absl::StatusOr<std::unique_ptr<LocalTcpCluster>> Start(int t);
  ~LocalTcpCluster();

  const TcpTopology& topology() const { return topology_; }
  // Joins every role thread and returns the first failure.
  absl::Status Join();

 private:
  LocalTcpCluster() = default;

  TcpTopology topology_;
  std::vector<std::thread> threads_;
  std::vector<absl::Status> results_;
  bool joined_ = false;
};

}  // namespace ppkm

#endif  // PPKM_SESSION_H_
