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
 * @file fusion.hpp
 * @brief Edge-driven, stage-fused execution of one HGNN inference.
 *
 * Every edge of every semantic graph sits in an NA task list from the start.
 * Processing an edge whose endpoints are not projected yet queues the
 * endpoints for FP and sends the edge to the tail of its list; otherwise the
 * edge's exp(logit) * h'_u and exp(logit) are added to the target's partial
 * numerator and denominator. When the last in-edge of a target is done the
 * target goes through LSF (division, activation, semantic score), and when
 * every target of a graph is done the graph goes through GSF. A FINAL pass
 * per layer divides the global accumulators.
 *
 * Semantic graphs run in waves of num_lanes graphs; within a wave, graph i
 * is native to lane i and each round hands lanes at most `threshold` edges
 * (see plan_round).
 */

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "hihgnn/graph.hpp"
#include "hihgnn/model.hpp"
#include "hihgnn/scheduler.hpp"
#include "hihgnn/trace.hpp"

namespace hihgnn {

enum class Precision { kF64, kF32 };

struct FusionOptions {
  std::uint32_t num_lanes = 1;
  std::uint64_t threshold = 256;
  bool balance = true;
  bool rab = true;  // off: every edge re-projects and re-scores its endpoints
  bool record_trace = true;
  Precision precision = Precision::kF64;
  std::uint32_t element_bytes = 4;
};

enum class NaKind { kAttention, kMean, kAttentionWithEdgeType };
enum class SfKind { kHan, kMean, kSumWithSelf, kNone };

struct StageBehavior {
  NaKind na;
  SfKind sf;
  ProjectionScope scope;
  bool project_targets;  // the target half of the logit needs h'_v
  bool divide_final;     // FINAL divides by the accumulated semantic weight
};

/// Stage table per model. Throws std::invalid_argument for unknown kinds.
StageBehavior model_dispatch(ModelKind kind);

enum class EdgeOutcome { kDeferred, kFpHit, kFullHit, kRecomputed };

/// Three status bits per vertex and semantic graph: Projected (in the
/// graph's reuse scope), source-half theta, target-half theta.
class Rab {
 public:
  static constexpr std::uint8_t kProjected = 0b100;
  static constexpr std::uint8_t kThetaSrc = 0b010;
  static constexpr std::uint8_t kThetaDst = 0b001;

  /// True for the five reachable codes 000, 100, 110, 101, 111.
  static bool valid_code(std::uint8_t code) { return code == 0 || (code & kProjected) != 0; }
};

struct FusionStats {
  std::uint64_t rounds = 0;
  std::uint64_t fp_events = 0;
  std::uint64_t theta_events = 0;
  std::uint64_t na_deferred = 0;
  std::uint64_t na_fp_hit = 0;
  std::uint64_t na_full_hit = 0;
  std::uint64_t na_recomputed = 0;
  std::uint64_t sync_events = 0;
  std::uint64_t lsf_events = 0;
  std::uint64_t gsf_events = 0;
  std::uint64_t final_events = 0;
  std::uint64_t max_fp_per_vertex_scope = 0;      // over (layer, scope, type, vertex)
  std::uint64_t max_theta_per_vertex_graph = 0;   // over (layer, graph, vertex)
  std::uint64_t fp_violations = 0;                // FP beyond one per vertex and scope
  std::uint64_t theta_violations = 0;             // theta beyond two per vertex and graph
  std::uint64_t invalid_rab_codes = 0;
};

struct FusionResult {
  EmbeddingResult embeddings;
  Trace trace;
  FusionStats stats;
};

class FusionEngine {
 public:
  FusionEngine(const HetGraph& g, const std::vector<SemanticGraph>& sgs, const ModelParams& params,
               FusionOptions options);

  /// Runs every layer with the graphs visited in `order` (indices into the
  /// semantic graph list). Throws if the order is not a permutation.
  FusionResult run(std::span<const std::size_t> order);

  // Step-wise interface; run() is built from these.
  void begin_layer(std::uint32_t layer);
  /// Graph sg_indices[i] becomes native to lane i. Loads its NA task list.
  void begin_wave(std::span<const std::size_t> sg_indices);
  void next_round();
  /// Projects queued endpoints and scores requested theta halves.
  void drain_fp();
  EdgeOutcome process_edge(std::size_t slot, Edge e, std::uint32_t lane, std::uint8_t attempt = 0);
  /// Sync of helper-lane partials, then LSF. Requires all in-edges done.
  void finalize_target(std::size_t slot, VertexId v);
  /// GSF for a graph whose targets all went through LSF.
  void finalize_semantic_graph(std::size_t slot);
  void end_wave();
  /// FINAL for every vertex of every target type; produces the layer output.
  void finish_layer();

  /// Processes rounds until the wave's lists are empty.
  void run_wave();

  std::uint8_t rab_code(std::size_t slot, TypeId type, VertexId v) const;
  std::size_t pending_fp() const noexcept { return fp_queue_.size(); }
  std::size_t queue_size(std::size_t slot) const { return slots_.at(slot).queue.size(); }
  const std::vector<VertexId>& completed_targets(std::size_t slot) const {
    return slots_.at(slot).ready;
  }

  const FusionStats& stats() const noexcept { return stats_; }
  const Trace& trace() const noexcept { return trace_; }
  FusionResult take_result();

 private:
  struct ScopeStore {
    Matrix rows;
    std::vector<std::uint8_t> projected;
    std::vector<std::uint8_t> pending;
    std::vector<std::uint8_t> fp_count;
  };
  struct QueuedEdge {
    VertexId src;
    VertexId dst;
    std::uint8_t attempt;
  };
  struct FpTask {
    std::size_t slot;
    std::uint8_t role;  // 0 source endpoint, 1 target endpoint
    VertexId v;
    std::uint32_t lane;
  };
  struct Slot {
    std::size_t sg = 0;
    std::uint32_t lane = 0;
    std::uint16_t src_scope = 0;
    ScopeStore* src_store = nullptr;
    ScopeStore* dst_store = nullptr;
    std::vector<double> theta_src, theta_dst;
    std::vector<std::uint8_t> theta_src_bit, theta_dst_bit;
    std::vector<std::uint8_t> theta_pending_src, theta_pending_dst;
    std::vector<std::uint32_t> theta_count_src, theta_count_dst;
    std::vector<std::uint32_t> remaining;
    std::deque<QueuedEdge> queue;
    std::vector<VertexId> ready;  // targets whose last in-edge finished this round
    PartialStore partials{0, 0, 0, 1};
    Matrix z;
    double w_acc = 0.0;
    std::size_t finalized = 0;
    bool gsf_done = false;
    double extra_logit = 0.0;
  };

  ScopeStore& store(std::uint16_t scope, TypeId type);
  const Matrix& weight_for(std::uint16_t scope, const SemanticGraph& sg, TypeId type) const;
  void project(std::uint16_t scope, TypeId type, VertexId v, const SemanticGraph& sg,
               std::size_t slot, std::uint8_t role, std::uint32_t lane);
  void score_theta(std::size_t slot, std::uint8_t role, VertexId v, std::uint32_t lane);
  void request(std::size_t slot, std::uint8_t role, VertexId v, std::uint32_t lane);
  void emit(const TraceEvent& e);
  double round_value(double x) const;
  void round_row(std::span<double> row) const;

  const HetGraph& g_;
  const std::vector<SemanticGraph>& sgs_;
  const ModelParams& params_;
  FusionOptions opt_;
  StageBehavior behavior_;
  std::vector<TypeId> targets_;

  std::uint32_t layer_ = 0;
  std::uint32_t round_ = 0;
  bool round_open_ = false;
  std::vector<const Matrix*> input_;
  std::vector<Matrix> layer_out_;
  std::map<std::pair<std::uint16_t, TypeId>, ScopeStore> stores_;
  std::vector<Slot> slots_;
  std::vector<FpTask> fp_queue_;
  std::vector<Matrix> z_acc_;         // per target type, global semantic accumulator
  std::vector<double> beta_g_;        // per target type
  std::vector<double> graph_weight_;  // per semantic graph, exp(w_P) or 1
  std::vector<std::uint8_t> visited_;

  EmbeddingResult result_;
  FusionStats stats_;
  Trace trace_;
};

/// Convenience wrapper around FusionEngine::run.
FusionResult run_fused(const HetGraph& g, const std::vector<SemanticGraph>& sgs,
                       const ModelParams& params, std::span<const std::size_t> order,
                       const FusionOptions& options = {});

/// Decomposed softmax aggregation, (sum exp(t_k) h_k) / (sum exp(t_k)),
/// accumulated one term at a time as the engine does it.
std::vector<double> decomposed_softmax_aggregate(std::span<const double> logits,
                                                 const Matrix& rows);
/// Reference: normalize the softmax first, then take the weighted sum.
std::vector<double> direct_softmax_aggregate(std::span<const double> logits, const Matrix& rows);

}  // namespace hihgnn
