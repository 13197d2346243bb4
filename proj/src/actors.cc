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

#include "ppkm/actors.h"

#include <utility>

#include "absl/strings/str_cat.h"
#include "ppkm/protocol.h"
#include "ppkm/rng.h"

namespace ppkm {
namespace {

absl::Status ProtocolError(const Endpoint& who, int64_t round,
                           std::string_view what) {
  return absl::FailedPreconditionError(
      absl::StrCat("protocol error at ", who.Name(), ", round ", round, ": ", std::string(what)));
}

}  // namespace

nlohmann::json RoleCounters::ToJson() const {
  return {{"multiplications", multiplications},
          {"additions", additions},
          {"inversions", inversions},
          {"comparisons", comparisons},
          {"distance_evaluations", distance_evaluations},
          {"messages_sent", messages_sent},
          {"messages_received", messages_received},
          {"bytes_sent", bytes_sent},
          {"bytes_received", bytes_received}};
}

// ---------------------------------------------------------------------------
// ComputeServer

absl::StatusOr<std::vector<Envelope>> ComputeServer::Handle(const Envelope& in) {
  if (const auto* m = std::get_if<HeaderMsg>(&in.payload)) {
    header_ = m->header;
    return std::vector<Envelope>{};
  }
  if (const auto* m = std::get_if<InitMsg>(&in.payload)) {
    if (!header_) return ProtocolError(endpoint(), 0, "Init before Header");
    if (m->server != index_) return ProtocolError(endpoint(), 0, "Init for another server");
    share_ = m->points;
    centers_.centers = m->centers;
    chain_ = KeyChainState::Create(m->keys, header_->ell1);
    if (header_->max_iters <= 0) {
      auto assignment = AssignClusters(share_, centers_);
      if (!assignment.ok()) return assignment.status();
      labels_ = assignment->labels;
      return Finish(/*converged=*/false);
    }
    return RunRound(1);
  }
  if (const auto* m = std::get_if<CentroidsMsg>(&in.payload)) {
    if (done_) return ProtocolError(endpoint(), m->round, "Centroids after Done");
    if (m->round != round_) {
      return ProtocolError(endpoint(), round_,
                           absl::StrCat("Centroids for round ", m->round));
    }
    auto next = UnscaleCentroids(*m, chain_.keys, centers_);
    if (!next.ok()) return next.status();
    ++counters_.inversions;
    counters_.multiplications +=
        static_cast<int64_t>(centers_.k() * (centers_.k() ? centers_.centers[0].dim() : 0));
    for (bool e : m->empty) empty_cluster_events_ += e ? 1 : 0;
    const bool converged =
        CentersConverged(centers_.centers, next->centers, header_->tolerance) &&
        !insert_seen_;
    centers_ = *std::move(next);
    NextKeys(chain_, CentroidPayloadBytes(*m));
    if (converged || round_ >= header_->max_iters) return Finish(converged);
    return RunRound(round_ + 1);
  }
  if (const auto* m = std::get_if<InsertMsg>(&in.payload)) {
    if (done_) {
      return absl::FailedPreconditionError(absl::StrCat(
          endpoint().Name(), ": run already finished; start a new run"));
    }
    pending_.insert(pending_.end(), m->points.begin(), m->points.end());
    insert_seen_ = true;
    return std::vector<Envelope>{};
  }
  if (std::holds_alternative<ShutdownMsg>(in.payload)) {
    stopped_ = true;
    return std::vector<Envelope>{};
  }
  return ProtocolError(endpoint(), round_,
                       absl::StrCat("unexpected ", PayloadType(in.payload)));
}

void ComputeServer::MergePending() {
  share_.insert(share_.end(), pending_.begin(), pending_.end());
  pending_.clear();
  insert_seen_ = false;
}

absl::StatusOr<std::vector<Envelope>> ComputeServer::RunRound(int64_t round) {
  MergePending();
  round_ = round;
  auto assignment = AssignClusters(share_, centers_);
  if (!assignment.ok()) return assignment.status();
  counters_.distance_evaluations += assignment->distance_evaluations;
  counters_.multiplications += assignment->multiplications;
  counters_.comparisons += assignment->comparisons;
  labels_ = assignment->labels;
  label_history_.push_back(labels_);
  center_history_.push_back(centers_.centers);
  key_history_.push_back(chain_.keys);
  SharesMsg shares = MaskShare(assignment->sums, assignment->counts, chain_.keys, index_);
  counters_.multiplications += static_cast<int64_t>(
      shares.masked_counts.size() *
      (1 + (shares.masked_sums.empty() ? 0 : shares.masked_sums[0].size())));
  std::vector<Envelope> out;
  out.push_back({endpoint(), Endpoint::Aggregator(header_->t), std::move(shares)});
  return out;
}

absl::StatusOr<std::vector<Envelope>> ComputeServer::Finish(bool converged) {
  if (!pending_.empty()) {
    // Points that arrived during the final round are labeled against the
    // final centers.
    for (const TransformedPoint& p : pending_) {
      labels_[p.id] = NearestCenter(p.coords.coords, centers_.centers,
                                    &counters_.comparisons);
    }
    MergePending();
  }
  done_ = true;
  DoneMsg msg;
  msg.server = index_;
  msg.iterations = header_->max_iters <= 0 ? 0 : round_;
  msg.converged = converged;
  msg.labels.assign(labels_.begin(), labels_.end());
  msg.centers = centers_.centers;
  std::vector<Envelope> out;
  out.push_back({endpoint(), Endpoint::Owner(), std::move(msg)});
  return out;
}

// ---------------------------------------------------------------------------
// Aggregator

absl::StatusOr<std::vector<Envelope>> Aggregator::Handle(const Envelope& in) {
  if (const auto* m = std::get_if<HeaderMsg>(&in.payload)) {
    header_ = m->header;
    return std::vector<Envelope>{};
  }
  if (std::holds_alternative<ShutdownMsg>(in.payload)) {
    stopped_ = true;
    return std::vector<Envelope>{};
  }
  const auto* m = std::get_if<SharesMsg>(&in.payload);
  if (m == nullptr) {
    return ProtocolError(endpoint(), last_round_,
                         absl::StrCat("unexpected ", PayloadType(in.payload)));
  }
  if (!header_) return ProtocolError(endpoint(), m->round, "Shares before Header");
  if (m->server < 1 || m->server >= header_->t) {
    return ProtocolError(endpoint(), m->round,
                         absl::StrCat("share from unknown server ", m->server));
  }
  if (m->round <= last_round_) {
    return ProtocolError(endpoint(), m->round, "share for a finished round");
  }
  auto& bucket = pending_[m->round];
  if (!bucket.emplace(m->server, *m).second) {
    return ProtocolError(endpoint(), m->round,
                         absl::StrCat("duplicate share from server ", m->server));
  }
  if (bucket.size() < static_cast<size_t>(header_->t - 1)) {
    return std::vector<Envelope>{};
  }
  // Canonical order: server index.
  std::vector<SharesMsg> ordered;
  for (auto& [server, share] : bucket) ordered.push_back(std::move(share));
  pending_.erase(m->round);
  auto centroids = Aggregate(ordered);
  if (!centroids.ok()) return centroids.status();
  last_round_ = centroids->round;
  for (size_t j = 0; j < centroids->empty.size(); ++j) {
    if (centroids->empty[j]) continue;
    ++counters_.inversions;
    counters_.multiplications +=
        static_cast<int64_t>(centroids->scaled_centers[j].size());
  }
  counters_.additions += static_cast<int64_t>(
      (ordered.size() - 1) * ordered[0].masked_counts.size() *
      (1 + header_->d));
  std::vector<Envelope> out;
  for (int i = 1; i < header_->t; ++i) {
    out.push_back({endpoint(), Endpoint::Server(i), *centroids});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Owner

Owner::Owner(Dataset dataset, RandomizationParams params,
             const OwnerOptions& options)
    : dataset_(std::move(dataset)), params_(std::move(params)), options_(options) {}

absl::StatusOr<std::unique_ptr<Owner>> Owner::Create(
    Dataset dataset, RandomizationParams params, const OwnerOptions& options) {
  if (absl::Status s = params.Validate(dataset.size(), dataset.dim()); !s.ok()) {
    return s;
  }
  if (options.t < 2) {
    return absl::InvalidArgumentError(absl::StrCat("need t >= 2, got ", options.t));
  }
  if (options.k < 1 || static_cast<size_t>(options.k) > dataset.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "k must be in [1, n]; got k = ", options.k, ", n = ", dataset.size()));
  }
  if (options.max_iters < 0 || !(options.tolerance >= 0.0)) {
    return absl::InvalidArgumentError("max_iters and tolerance must be >= 0");
  }
  return std::unique_ptr<Owner>(
      new Owner(std::move(dataset), std::move(params), options));
}

absl::StatusOr<std::vector<Envelope>> Owner::Start() {
  if (started_) return absl::FailedPreconditionError("run already started");
  started_ = true;
  TransformCounters tc;
  auto transformed = Randomize(dataset_, params_, &tc);
  if (!transformed.ok()) return transformed.status();
  counters_.multiplications += tc.multiplications;
  counters_.additions += tc.additions;
  auto init_ids = SampleInitialCenterIds(
      dataset_.ids(), options_.k,
      DeriveSeed(options_.seed, SeedStream::kInitialCenters));
  if (!init_ids.ok()) return init_ids.status();
  initial_center_ids_ = *init_ids;
  std::vector<Point> centers;
  for (PointId id : initial_center_ids_) {
    centers.push_back((*transformed)[dataset_.IndexOf(id)].coords);
  }
  auto partition =
      MakePartition(*std::move(transformed), options_.t, options_.partition,
                    DeriveSeed(options_.seed, SeedStream::kPartition));
  if (!partition.ok()) return partition.status();
  partition_ = *std::move(partition);
  total_points_ = dataset_.size();

  header_ = RunHeader{options_.k,        options_.t,        static_cast<int>(dataset_.dim()),
                      options_.ell1,     options_.max_iters, options_.tolerance};
  const RoundKeys keys =
      OwnerDistributedKeys(DeriveSeed(options_.seed, SeedStream::kKeys), options_.ell1)
          .Keys();
  std::vector<Envelope> out;
  for (int i = 1; i < options_.t; ++i) {
    out.push_back({endpoint(), Endpoint::Server(i), HeaderMsg{header_}});
  }
  out.push_back({endpoint(), Endpoint::Aggregator(options_.t), HeaderMsg{header_}});
  for (int i = 1; i < options_.t; ++i) {
    InitMsg init;
    init.server = i;
    init.points = partition_.shares[i - 1];
    init.centers = centers;
    init.keys = keys;
    out.push_back({endpoint(), Endpoint::Server(i), std::move(init)});
  }
  return out;
}

absl::StatusOr<std::vector<Envelope>> Owner::Insert(
    std::span<const Point> points, std::span<const PointId> ids) {
  if (!started_) return absl::FailedPreconditionError("run not started");
  if (complete_ || !done_.empty()) {
    return absl::FailedPreconditionError(
        "run already converged; start a new run to add points");
  }
  if (points.empty()) return std::vector<Envelope>{};
  for (PointId id : ids) {
    if (partition_.server_of.count(id) != 0) {
      return absl::InvalidArgumentError(absl::StrCat("point id ", id, " already in the run"));
    }
  }
  ++insert_batches_;
  TransformCounters tc;
  auto batch = RandomizeIncremental(
      points, ids, params_,
      MixSeed(DeriveSeed(options_.seed, SeedStream::kIncrementalNoise),
              static_cast<uint64_t>(insert_batches_)),
      &tc);
  if (!batch.ok()) return batch.status();
  counters_.multiplications += tc.multiplications;
  counters_.additions += tc.additions;
  for (size_t i = 0; i < ids.size(); ++i) late_noise_[ids[i]] = batch->epsilons[i];
  auto routed = MakePartition(std::move(batch->points), options_.t,
                              options_.partition,
                              MixSeed(DeriveSeed(options_.seed, SeedStream::kPartition),
                                      static_cast<uint64_t>(insert_batches_)));
  if (!routed.ok()) return routed.status();
  for (const auto& [id, server] : routed->server_of) partition_.server_of[id] = server;
  total_points_ += points.size();
  std::vector<Envelope> out;
  for (int i = 1; i < options_.t; ++i) {
    out.push_back({endpoint(), Endpoint::Server(i),
                   InsertMsg{std::move(routed->shares[i - 1])}});
  }
  return out;
}

absl::StatusOr<std::vector<Envelope>> Owner::Handle(const Envelope& in) {
  const auto* m = std::get_if<DoneMsg>(&in.payload);
  if (m == nullptr) {
    return ProtocolError(endpoint(), 0,
                         absl::StrCat("unexpected ", PayloadType(in.payload)));
  }
  if (m->server < 1 || m->server >= options_.t || !done_.emplace(m->server, *m).second) {
    return ProtocolError(endpoint(), m->iterations,
                         absl::StrCat("bad Done from server ", m->server));
  }
  if (done_.size() < static_cast<size_t>(options_.t - 1)) return std::vector<Envelope>{};

  const DoneMsg& first = done_.begin()->second;
  for (const auto& [server, done] : done_) {
    if (done.centers != first.centers || done.iterations != first.iterations ||
        done.converged != first.converged) {
      return ProtocolError(endpoint(), done.iterations,
                           absl::StrCat("server ", server, " disagrees on the result"));
    }
    for (const auto& [id, label] : done.labels) labels_[id] = label;
  }
  if (labels_.size() != total_points_) {
    return ProtocolError(endpoint(), first.iterations,
                         absl::StrCat("received ", labels_.size(), " labels for ",
                                      total_points_, " points"));
  }
  centers_.centers = first.centers;
  iterations_ = first.iterations;
  converged_ = first.converged;
  complete_ = true;
  std::vector<Envelope> out;
  for (int i = 1; i < options_.t; ++i) {
    out.push_back({endpoint(), Endpoint::Server(i), ShutdownMsg{}});
  }
  out.push_back({endpoint(), Endpoint::Aggregator(options_.t), ShutdownMsg{}});
  return out;
}

}  // namespace ppkm
