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

#ifndef PPKM_ACTORS_H_
#define PPKM_ACTORS_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "ppkm/core.h"
#include "ppkm/keysched.h"
#include "ppkm/messages.h"
#include "ppkm/params.h"
#include "ppkm/transform.h"

namespace ppkm {

// Operation and traffic counters kept per role.
struct RoleCounters {
  int64_t multiplications = 0;
  int64_t additions = 0;
  int64_t inversions = 0;
  int64_t comparisons = 0;
  int64_t distance_evaluations = 0;
  int64_t messages_sent = 0;
  int64_t messages_received = 0;
  int64_t bytes_sent = 0;
  int64_t bytes_received = 0;

  nlohmann::json ToJson() const;
};

// A protocol role. Roles share no state; they only exchange envelopes.
class Actor {
 public:
  virtual ~Actor() = default;

  virtual Endpoint endpoint() const = 0;
  virtual absl::StatusOr<std::vector<Envelope>> Handle(const Envelope& in) = 0;

  RoleCounters& counters() { return counters_; }
  const RoleCounters& counters() const { return counters_; }
  // Set once a Shutdown has been handled.
  bool stopped() const { return stopped_; }

 protected:
  RoleCounters counters_;
  bool stopped_ = false;
};

// Compute server i in 1..t-1: holds a share of randomized points and the key
// chain, runs assignment and masking each round.
class ComputeServer : public Actor {
 public:
  explicit ComputeServer(int index) : index_(index) {}

  Endpoint endpoint() const override { return Endpoint::Server(index_); }
  absl::StatusOr<std::vector<Envelope>> Handle(const Envelope& in) override;

  bool done() const { return done_; }
  int64_t round() const { return round_; }
  size_t share_size() const { return share_.size(); }
  const RoundKeys& keys() const { return chain_.keys; }

  // Diagnostics local to this server: its own labels, the centers and keys
  // of every round it ran.
  const std::vector<ClusterAssignment>& label_history() const {
    return label_history_;
  }
  const std::vector<std::vector<Point>>& center_history() const {
    return center_history_;
  }
  const std::vector<RoundKeys>& key_history() const { return key_history_; }
  int64_t empty_cluster_events() const { return empty_cluster_events_; }

 private:
  absl::StatusOr<std::vector<Envelope>> RunRound(int64_t round);
  absl::StatusOr<std::vector<Envelope>> Finish(bool converged);
  void MergePending();

  int index_;
  std::optional<RunHeader> header_;
  std::vector<TransformedPoint> share_;
  std::vector<TransformedPoint> pending_;
  bool insert_seen_ = false;
  CentroidSet centers_;
  KeyChainState chain_;
  int64_t round_ = 0;
  ClusterAssignment labels_;
  bool done_ = false;
  int64_t empty_cluster_events_ = 0;
  std::vector<ClusterAssignment> label_history_;
  std::vector<std::vector<Point>> center_history_;
  std::vector<RoundKeys> key_history_;
};

// Server t: receives masked shares, returns scaled centroids. Holds no data
// and no keys.
class Aggregator : public Actor {
 public:
  explicit Aggregator(int t) : t_(t) {}

  Endpoint endpoint() const override { return Endpoint::Aggregator(t_); }
  absl::StatusOr<std::vector<Envelope>> Handle(const Envelope& in) override;

  int64_t rounds_completed() const { return last_round_; }

 private:
  int t_;
  std::optional<RunHeader> header_;
  std::map<int64_t, std::map<int, SharesMsg>> pending_;
  int64_t last_round_ = 0;
};

struct OwnerOptions {
  int k = 2;
  int t = 3;
  int64_t max_iters = 100;
  double tolerance = 1e-9;
  int ell1 = 64;
  uint64_t seed = 0;
  PartitionStrategy partition = PartitionStrategy::kRoundRobin;
};

// The data owner: randomizes, partitions, seeds the run and collects labels.
class Owner : public Actor {
 public:
  static absl::StatusOr<std::unique_ptr<Owner>> Create(
      Dataset dataset, RandomizationParams params, const OwnerOptions& options);

  Endpoint endpoint() const override { return Endpoint::Owner(); }
  absl::StatusOr<std::vector<Envelope>> Handle(const Envelope& in) override;

  // Header to every server, Init to every compute server.
  absl::StatusOr<std::vector<Envelope>> Start();
  // Randomizes late points with fresh noise and routes them; every compute
  // server gets an Insert, possibly empty.
  absl::StatusOr<std::vector<Envelope>> Insert(std::span<const Point> points,
                                               std::span<const PointId> ids);

  bool complete() const { return complete_; }
  const RunHeader& header() const { return header_; }
  const ClusterAssignment& labels() const { return labels_; }
  const CentroidSet& centers() const { return centers_; }
  int64_t iterations() const { return iterations_; }
  bool converged() const { return converged_; }
  const std::vector<PointId>& initial_center_ids() const {
    return initial_center_ids_;
  }
  const RandomizationParams& params() const { return params_; }
  const Dataset& dataset() const { return dataset_; }
  const Partition& partition() const { return partition_; }
  size_t total_points() const { return total_points_; }

 private:
  Owner(Dataset dataset, RandomizationParams params, const OwnerOptions& options);

  Dataset dataset_;
  RandomizationParams params_;
  OwnerOptions options_;
  RunHeader header_;
  Partition partition_;
  std::vector<PointId> initial_center_ids_;
  std::map<PointId, double> late_noise_;
  size_t total_points_ = 0;
  int64_t insert_batches_ = 0;
  bool started_ = false;
  std::map<int, DoneMsg> done_;
  ClusterAssignment labels_;
  CentroidSet centers_;
  int64_t iterations_ = 0;
  bool converged_ = false;
  bool complete_ = false;
};

}  // namespace ppkm

#endif  // PPKM_ACTORS_H_
