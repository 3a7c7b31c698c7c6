/*
 * Copyright 2026 The hihgnn-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file scheduler.hpp
 * @brief Lane balancing for edge task lists and similarity-aware ordering of
 *        semantic graphs.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hihgnn/graph.hpp"

namespace hihgnn {

// ---- lane balancing ------------------------------------------------------

/// `count` tasks starting `begin` entries from the front of list `list`.
struct LaneAssignment {
  std::uint32_t lane = 0;
  std::uint32_t list = 0;
  std::uint64_t begin = 0;
  std::uint64_t count = 0;

  friend bool operator==(const LaneAssignment&, const LaneAssignment&) = default;
};

struct RoundPlan {
  std::vector<LaneAssignment> assignments;
  std::vector<std::uint64_t> lane_load;  // tasks per lane this round
};

/// One round for up to `num_lanes` lists, list i native to lane i. Each list
/// is clipped at `threshold` and the clipped part goes to its native lane.
/// With `balance`, the excess (in list order) then fills idle lanes first and
/// under-threshold lanes after, both in ascending lane order. Tasks that do
/// not fit stay at the front of their list for the next round.
RoundPlan plan_round(std::span<const std::uint64_t> list_sizes, std::uint32_t num_lanes,
                     std::uint64_t threshold, bool balance = true);

struct LanePlan {
  std::uint32_t num_lanes = 1;
  std::uint64_t threshold = 1;
  bool balance = true;
  /// Lists are taken num_lanes at a time; every round belongs to one wave.
  std::vector<std::uint32_t> round_wave;
  std::vector<RoundPlan> rounds;  // list indices are global

  /// Total tasks each lane received over all rounds.
  std::vector<std::uint64_t> lane_totals() const;
};

/// Repeats plan_round until every list is empty.
LanePlan balance_workloads(std::span<const std::uint64_t> list_sizes, std::uint32_t num_lanes,
                           std::uint64_t threshold, bool balance = true);

/// Per-lane numerator/denominator partials for the targets of one semantic
/// graph. The native lane stores every target densely; helper lanes keep
/// only the targets they touched.
class PartialStore {
 public:
  PartialStore(std::uint32_t num_vertices, std::uint32_t width, std::uint32_t native_lane,
               std::uint32_t num_lanes);

  void accumulate(std::uint32_t lane, VertexId v, double weight, std::span<const double> row);

  /// Helper lanes holding a partial for v, ascending.
  std::vector<std::uint32_t> remote_lanes(VertexId v) const;

  /// Folds helper partials into the native one (ascending lane order) and
  /// returns the lanes merged. Merging the same vertex twice throws
  /// std::logic_error.
  std::vector<std::uint32_t> sync(VertexId v);
  bool synced(VertexId v) const { return synced_[v] != 0; }

  std::span<const double> numerator(VertexId v) const;
  double denominator(VertexId v) const { return den_[v]; }

  std::uint32_t num_vertices() const noexcept { return static_cast<std::uint32_t>(den_.size()); }
  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t native_lane() const noexcept { return native_; }

 private:
  struct Remote {
    std::uint32_t lane;
    std::vector<double> num;
    double den = 0.0;
  };
  std::uint32_t width_;
  std::uint32_t native_;
  std::uint32_t num_lanes_;
  std::vector<double> num_;
  std::vector<double> den_;
  std::vector<std::uint8_t> synced_;
  std::vector<std::vector<Remote>> remote_;  // per vertex, usually empty
};

/// Merges every vertex of every store; returns the number of cross-lane
/// transfers.
std::size_t sync_partials(std::span<PartialStore> stores);

// ---- similarity ordering -------------------------------------------------

/// Complete weighted graph over semantic graphs plus two virtual endpoints.
/// Weights are kept as integer numerators over `denominator` so path costs
/// compare exactly: a pair sharing eta vertex types weighs (D - eta) / D, a
/// pair sharing none weighs 1, virtual endpoints weigh 0.
struct SimilarityHypergraph {
  std::vector<std::string> nodes;
  std::vector<std::vector<std::uint32_t>> types;  // sorted vertex types per node
  std::vector<std::vector<std::uint32_t>> eta;    // shared type count per pair
  std::uint64_t denominator = 1;                  // max(sum of eta over real edges, 1)

  std::size_t size() const noexcept { return nodes.size(); }
  std::size_t virtual_start() const noexcept { return nodes.size(); }
  std::size_t virtual_end() const noexcept { return nodes.size() + 1; }

  bool real_edge(std::size_t i, std::size_t j) const { return i != j && eta[i][j] > 0; }
  /// Indices >= size() are the virtual endpoints.
  std::uint64_t weight_units(std::size_t i, std::size_t j) const;
  double weight(std::size_t i, std::size_t j) const;
};

SimilarityHypergraph build_hypergraph(const std::vector<SemanticGraph>& sgs);
/// Same, from explicit ids and the vertex types each graph touches.
SimilarityHypergraph build_hypergraph(const std::vector<std::string>& ids,
                                      const std::vector<std::vector<std::uint32_t>>& types);

struct ExecutionOrder {
  std::vector<std::size_t> indices;  // into the hypergraph / semantic graph list
  std::vector<std::string> ids;
  std::uint64_t cost_units = 0;
  double cost = 0.0;
};

std::uint64_t path_cost_units(const SimilarityHypergraph& h, std::span<const std::size_t> path);
ExecutionOrder make_order(const SimilarityHypergraph& h, std::vector<std::size_t> path);

/// Exact Held-Karp for up to 20 graphs; ties go to the lexicographically
/// smallest id sequence. Larger inputs use nearest neighbor plus 2-opt.
ExecutionOrder shortest_hamilton_path(const SimilarityHypergraph& h);
inline constexpr std::size_t kExactHamiltonLimit = 20;

/// Seeded Fisher-Yates shuffle of 0..n-1.
ExecutionOrder random_order(const SimilarityHypergraph& h, std::uint64_t seed);

/// {"order": [...ids], "cost": x}
std::string order_to_json(const ExecutionOrder& o);
/// Resolves ids against the hypergraph; throws on unknown, missing or
/// repeated ids.
ExecutionOrder order_from_json(const SimilarityHypergraph& h, const std::string& text);

std::string lane_plan_to_json(const LanePlan& plan);

}  // namespace hihgnn
