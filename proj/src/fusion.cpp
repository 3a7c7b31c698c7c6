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

#include "hihgnn/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hihgnn {

StageBehavior model_dispatch(ModelKind kind) {
  switch (kind) {
    case ModelKind::kHan:
      return {NaKind::kAttention, SfKind::kHan, ProjectionScope::kPerType, true, true};
    case ModelKind::kRgat:
      return {NaKind::kAttention, SfKind::kMean, ProjectionScope::kPerRelation, true, true};
    case ModelKind::kRgcn:
      return {NaKind::kMean, SfKind::kSumWithSelf, ProjectionScope::kPerRelation, false, false};
    case ModelKind::kShgn:
      return {NaKind::kAttentionWithEdgeType, SfKind::kNone, ProjectionScope::kPerType, true, false};
  }
  throw std::invalid_argument("unsupported model kind");
}

FusionEngine::FusionEngine(const HetGraph& g, const std::vector<SemanticGraph>& sgs,
                           const ModelParams& params, FusionOptions options)
    : g_(g), sgs_(sgs), params_(params), opt_(options), behavior_(model_dispatch(params.kind)) {
  if (sgs_.empty()) throw std::invalid_argument("no semantic graphs to run");
  if (sgs_.size() >= kNoSg) throw std::invalid_argument("too many semantic graphs");
  if (opt_.num_lanes == 0 || opt_.num_lanes > 64) {
    throw std::invalid_argument("num_lanes must be in [1, 64]");
  }
  if (opt_.threshold == 0) throw std::invalid_argument("threshold must be at least 1");
  targets_ = target_types(sgs_);

  const std::size_t nt = g_.vertex_types().size();
  input_.assign(nt, nullptr);
  layer_out_.resize(nt);
  for (TypeId t = 0; t < nt; ++t) {
    if (g_.has_features(t)) input_[t] = &g_.raw_features(t);
  }
  result_.h.resize(nt);
  result_.z.resize(sgs_.size());
  result_.w.assign(sgs_.size(), 0.0);
  result_.beta.assign(sgs_.size(), 1.0);

  TraceHeader& h = trace_.header;
  h.model = std::string(model_name(params_.kind));
  h.hidden_dim = params_.hidden_dim;
  h.element_bytes = opt_.element_bytes;
  h.num_lanes = opt_.num_lanes;
  h.num_layers = params_.num_layers;
  h.threshold = opt_.threshold;
  h.rab = opt_.rab;
  h.balance = opt_.balance;
  for (const VertexType& t : g_.vertex_types()) {
    h.type_names.push_back(t.name);
    h.type_counts.push_back(t.count);
  }
  for (const SemanticGraph& sg : sgs_) {
    h.graphs.push_back({sg.id, sg.src_type, sg.dst_type, sg.num_edges(), sg.targets.size()});
  }
}

double FusionEngine::round_value(double x) const {
  return opt_.precision == Precision::kF32 ? static_cast<double>(static_cast<float>(x)) : x;
}

void FusionEngine::round_row(std::span<double> row) const {
  if (opt_.precision == Precision::kF64) return;
  for (double& x : row) x = static_cast<double>(static_cast<float>(x));
}

void FusionEngine::emit(const TraceEvent& e) {
  if (!opt_.record_trace) return;
  TraceEvent ev = e;
  ev.round = round_;
  ev.layer = static_cast<std::uint8_t>(layer_);
  trace_.events.push_back(ev);
}

FusionEngine::ScopeStore& FusionEngine::store(std::uint16_t scope, TypeId type) {
  auto [it, fresh] = stores_.try_emplace({scope, type});
  if (fresh) {
    const std::uint32_t n = g_.vertex_type(type).count;
    it->second.rows = Matrix(n, params_.hidden_dim);
    it->second.projected.assign(n, 0);
    it->second.pending.assign(n, 0);
    it->second.fp_count.assign(n, 0);
  }
  return it->second;
}

const Matrix& FusionEngine::weight_for(std::uint16_t scope, const SemanticGraph& sg,
                                       TypeId type) const {
  const std::string& tname = g_.vertex_type(type).name;
  if (scope == kScopeType) return params_.at(key_type_weight(layer_, tname));
  return params_.at(key_rel_weight(layer_, sg.id, tname));
}

void FusionEngine::begin_layer(std::uint32_t layer) {
  if (layer >= params_.num_layers) throw std::invalid_argument("layer out of range");
  layer_ = layer;
  stores_.clear();
  fp_queue_.clear();
  slots_.clear();
  z_acc_.assign(g_.vertex_types().size(), Matrix());
  beta_g_.assign(g_.vertex_types().size(), 0.0);
  graph_weight_.assign(sgs_.size(), 0.0);
  visited_.assign(sgs_.size(), 0);
  for (TypeId t : targets_) z_acc_[t] = Matrix(g_.vertex_type(t).count, params_.hidden_dim);
}

void FusionEngine::begin_wave(std::span<const std::size_t> sg_indices) {
  if (sg_indices.size() > opt_.num_lanes) throw std::invalid_argument("wave wider than lane count");
  slots_.clear();
  slots_.resize(sg_indices.size());
  for (std::size_t i = 0; i < sg_indices.size(); ++i) {
    const std::size_t k = sg_indices[i];
    if (k >= sgs_.size()) throw std::invalid_argument("semantic graph index out of range");
    if (visited_[k]) throw std::invalid_argument("semantic graph '" + sgs_[k].id + "' visited twice");
    visited_[k] = 1;
    const SemanticGraph& sg = sgs_[k];
    Slot& s = slots_[i];
    s.sg = k;
    s.lane = static_cast<std::uint32_t>(i);
    if (behavior_.scope == ProjectionScope::kPerType) {
      s.src_scope = kScopeType;
    } else {
      if (!sg.relation) throw std::invalid_argument("relation-scoped model on a metapath graph");
      s.src_scope = static_cast<std::uint16_t>(kScopeRelationBase + *sg.relation);
    }
    for (TypeId t : {sg.src_type, sg.dst_type}) {
      if (!input_[t]) {
        throw std::invalid_argument("vertex type '" + g_.vertex_type(t).name +
                                    "' has no features and cannot be projected");
      }
    }
    s.src_store = &store(s.src_scope, sg.src_type);
    s.dst_store = behavior_.project_targets ? &store(s.src_scope, sg.dst_type) : nullptr;
    const std::uint32_t ns = sg.edges.num_src();
    const std::uint32_t nd = sg.edges.num_dst();
    s.theta_src.assign(ns, 0.0);
    s.theta_dst.assign(nd, 0.0);
    s.theta_src_bit.assign(ns, 0);
    s.theta_dst_bit.assign(nd, 0);
    s.theta_pending_src.assign(ns, 0);
    s.theta_pending_dst.assign(nd, 0);
    s.theta_count_src.assign(ns, 0);
    s.theta_count_dst.assign(nd, 0);
    s.remaining.assign(nd, 0);
    for (VertexId v : sg.targets) s.remaining[v] = sg.edges.in_degree(v);
    for (VertexId v = 0; v < nd; ++v) {
      for (VertexId u : sg.edges.sources_of(v)) s.queue.push_back({u, v, 0});
    }
    s.partials = PartialStore(nd, params_.hidden_dim, s.lane, opt_.num_lanes);
    s.z = Matrix(nd, params_.hidden_dim);
    if (behavior_.na == NaKind::kAttentionWithEdgeType) {
      s.extra_logit = relation_logit_term(params_.at(key_layer(layer_, "a_rel", sg.id)),
                                          params_.at(key_layer(layer_, "h_rel", sg.id)),
                                          params_.at(key_layer(layer_, "W_rel", sg.id)));
    }
  }
}

void FusionEngine::next_round() {
  if (round_open_) ++round_;
  round_open_ = true;
  ++stats_.rounds;
}

void FusionEngine::project(std::uint16_t scope, TypeId type, VertexId v, const SemanticGraph& sg,
                           std::size_t slot, std::uint8_t role, std::uint32_t lane) {
  ScopeStore& st = store(scope, type);
  const Matrix& x = *input_[type];
  project_row(weight_for(scope, sg, type), x.row(v), st.rows.row(v));
  round_row(st.rows.row(v));
  st.projected[v] = 1;
  ++stats_.fp_events;
  const std::uint64_t c = ++st.fp_count[v];
  stats_.max_fp_per_vertex_scope = std::max<std::uint64_t>(stats_.max_fp_per_vertex_scope, c);
  if (opt_.rab && c > 1) ++stats_.fp_violations;
  TraceEvent e;
  e.stage = Stage::kFp;
  e.a = v;
  e.vtype = static_cast<std::uint16_t>(type);
  e.scope = scope;
  e.width = static_cast<std::uint32_t>(x.cols());
  e.lane = static_cast<std::uint16_t>(lane);
  e.sg = static_cast<std::uint16_t>(slots_[slot].sg);
  e.role = role;
  emit(e);
}

void FusionEngine::score_theta(std::size_t slot, std::uint8_t role, VertexId v,
                               std::uint32_t lane) {
  Slot& s = slots_[slot];
  const SemanticGraph& sg = sgs_[s.sg];
  if (role == 0) {
    s.theta_src[v] = round_value(dot(s.src_store->rows.row(v),
                                     params_.at(key_layer(layer_, "a_src", sg.id)).row(0)));
    s.theta_src_bit[v] = 1;
  } else {
    s.theta_dst[v] = round_value(dot(s.dst_store->rows.row(v),
                                     params_.at(key_layer(layer_, "a_dst", sg.id)).row(0)));
    s.theta_dst_bit[v] = 1;
  }
  ++stats_.theta_events;
  ++(role == 0 ? s.theta_count_src : s.theta_count_dst)[v];
  // Both halves belong to the same vertex when the endpoint types coincide.
  const std::uint64_t c = sg.src_type == sg.dst_type
                              ? s.theta_count_src[v] + s.theta_count_dst[v]
                              : (role == 0 ? s.theta_count_src[v] : s.theta_count_dst[v]);
  stats_.max_theta_per_vertex_graph = std::max<std::uint64_t>(stats_.max_theta_per_vertex_graph, c);
  if (opt_.rab && c > 2) ++stats_.theta_violations;
  TraceEvent e;
  e.stage = Stage::kTheta;
  e.a = v;
  e.vtype = static_cast<std::uint16_t>(role == 0 ? sg.src_type : sg.dst_type);
  e.sg = static_cast<std::uint16_t>(s.sg);
  e.scope = s.src_scope;
  e.width = params_.hidden_dim;
  e.lane = static_cast<std::uint16_t>(lane);
  e.role = role;
  emit(e);
}

void FusionEngine::request(std::size_t slot, std::uint8_t role, VertexId v, std::uint32_t lane) {
  Slot& s = slots_[slot];
  auto& pending = role == 0 ? s.theta_pending_src : s.theta_pending_dst;
  if (pending[v]) return;
  pending[v] = 1;
  fp_queue_.push_back({slot, role, v, lane});
}

void FusionEngine::drain_fp() {
  std::vector<FpTask> tasks;
  tasks.swap(fp_queue_);
  for (const FpTask& t : tasks) {
    Slot& s = slots_[t.slot];
    const SemanticGraph& sg = sgs_[s.sg];
    const TypeId type = t.role == 0 ? sg.src_type : sg.dst_type;
    ScopeStore* st = t.role == 0 ? s.src_store : s.dst_store;
    if (!st->projected[t.v]) project(s.src_scope, type, t.v, sg, t.slot, t.role, t.lane);
    if (behavior_.na != NaKind::kMean) {
      const bool have = t.role == 0 ? s.theta_src_bit[t.v] : s.theta_dst_bit[t.v];
      if (!have) score_theta(t.slot, t.role, t.v, t.lane);
    }
    (t.role == 0 ? s.theta_pending_src : s.theta_pending_dst)[t.v] = 0;
  }
}

std::uint8_t FusionEngine::rab_code(std::size_t slot, TypeId type, VertexId v) const {
  const Slot& s = slots_.at(slot);
  const SemanticGraph& sg = sgs_[s.sg];
  std::uint8_t code = 0;
  const ScopeStore* st = type == sg.src_type ? s.src_store : s.dst_store;
  if (st && st->projected[v]) code |= Rab::kProjected;
  if (type == sg.src_type && s.theta_src_bit[v]) code |= Rab::kThetaSrc;
  if (type == sg.dst_type && s.theta_dst_bit[v]) code |= Rab::kThetaDst;
  return code;
}

EdgeOutcome FusionEngine::process_edge(std::size_t slot, Edge e, std::uint32_t lane,
                                       std::uint8_t attempt) {
  Slot& s = slots_.at(slot);
  const SemanticGraph& sg = sgs_[s.sg];
  const bool attention = behavior_.na != NaKind::kMean;
  const VertexId u = e.src;
  const VertexId v = e.dst;

  TraceEvent na;
  na.stage = Stage::kNa;
  na.a = u;
  na.b = v;
  na.sg = static_cast<std::uint16_t>(s.sg);
  na.vtype = static_cast<std::uint16_t>(sg.dst_type);
  na.scope = s.src_scope;
  na.width = params_.hidden_dim;
  na.lane = static_cast<std::uint16_t>(lane);
  na.role = attempt;

  EdgeOutcome outcome;
  if (opt_.rab) {
    if (!Rab::valid_code(rab_code(slot, sg.src_type, u)) ||
        !Rab::valid_code(rab_code(slot, sg.dst_type, v))) {
      ++stats_.invalid_rab_codes;
    }
    const bool src_ready = s.src_store->projected[u] != 0;
    const bool dst_ready = !behavior_.project_targets || s.dst_store->projected[v] != 0;
    if (!src_ready || !dst_ready) {
      if (!src_ready) request(slot, 0, u, lane);
      if (!dst_ready) request(slot, 1, v, lane);
      na.reuse = Reuse::kMiss;
      emit(na);
      ++stats_.na_deferred;
      return EdgeOutcome::kDeferred;
    }
    bool scored = false;
    if (attention && !s.theta_src_bit[u]) {
      score_theta(slot, 0, u, lane);
      scored = true;
    }
    if (attention && !s.theta_dst_bit[v]) {
      score_theta(slot, 1, v, lane);
      scored = true;
    }
    outcome = scored ? EdgeOutcome::kFpHit : EdgeOutcome::kFullHit;
    na.reuse = scored ? Reuse::kFpHit : Reuse::kFullHit;
    ++(scored ? stats_.na_fp_hit : stats_.na_full_hit);
  } else {
    // Without the bitmap every edge re-projects and re-scores its endpoints.
    // The recomputed values equal the cached ones, so the cache still serves
    // the arithmetic; only the work is charged again.
    if (!s.src_store->projected[u]) {
      project(s.src_scope, sg.src_type, u, sg, slot, 0, lane);
    } else {
      TraceEvent fp;
      fp.stage = Stage::kFp;
      fp.a = u;
      fp.vtype = static_cast<std::uint16_t>(sg.src_type);
      fp.scope = s.src_scope;
      fp.width = static_cast<std::uint32_t>(input_[sg.src_type]->cols());
      fp.lane = static_cast<std::uint16_t>(lane);
      fp.sg = static_cast<std::uint16_t>(s.sg);
      emit(fp);
      ++stats_.fp_events;
    }
    if (behavior_.project_targets) {
      if (!s.dst_store->projected[v]) {
        project(s.src_scope, sg.dst_type, v, sg, slot, 1, lane);
      } else {
        TraceEvent fp;
        fp.stage = Stage::kFp;
        fp.a = v;
        fp.vtype = static_cast<std::uint16_t>(sg.dst_type);
        fp.scope = s.src_scope;
        fp.width = static_cast<std::uint32_t>(input_[sg.dst_type]->cols());
        fp.lane = static_cast<std::uint16_t>(lane);
        fp.sg = static_cast<std::uint16_t>(s.sg);
        fp.role = 1;
        emit(fp);
        ++stats_.fp_events;
      }
    }
    if (attention) {
      score_theta(slot, 0, u, lane);
      score_theta(slot, 1, v, lane);
    }
    outcome = EdgeOutcome::kRecomputed;
    na.reuse = Reuse::kNone;
    ++stats_.na_recomputed;
  }

  double weight = 1.0;
  if (attention) {
    weight = std::exp(edge_logit(s.theta_src[u], s.theta_dst[v], s.extra_logit, params_.leaky_slope));
  }
  s.partials.accumulate(lane, v, weight, s.src_store->rows.row(u));
  emit(na);
  if (--s.remaining[v] == 0) s.ready.push_back(v);
  return outcome;
}

void FusionEngine::finalize_target(std::size_t slot, VertexId v) {
  Slot& s = slots_.at(slot);
  const SemanticGraph& sg = sgs_[s.sg];
  if (s.remaining[v] != 0) throw std::logic_error("LSF before every in-edge of the target finished");
  for (std::uint32_t from : s.partials.sync(v)) {
    TraceEvent e;
    e.stage = Stage::kSync;
    e.a = v;
    e.b = s.lane;
    e.sg = static_cast<std::uint16_t>(s.sg);
    e.vtype = static_cast<std::uint16_t>(sg.dst_type);
    e.width = params_.hidden_dim + 1;
    e.lane = static_cast<std::uint16_t>(from);
    emit(e);
    ++stats_.sync_events;
  }
  const double den = s.partials.denominator(v);
  if (!(den > 0.0)) throw std::logic_error("zero softmax denominator for a target with in-edges");
  auto num = s.partials.numerator(v);
  auto z = s.z.row(v);
  const bool activate = behavior_.na != NaKind::kMean;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double x = num[j] / den;
    z[j] = activate ? elu(x, params_.elu_alpha) : x;
  }
  round_row(z);
  if (behavior_.sf == SfKind::kHan) {
    s.w_acc += semantic_score(params_.at(key_layer(layer_, "q")), params_.at(key_layer(layer_, "W_sem")),
                              params_.at(key_layer(layer_, "b")), z);
  }
  ++s.finalized;
  TraceEvent e;
  e.stage = Stage::kLsf;
  e.a = v;
  e.sg = static_cast<std::uint16_t>(s.sg);
  e.vtype = static_cast<std::uint16_t>(sg.dst_type);
  e.width = params_.hidden_dim;
  e.lane = static_cast<std::uint16_t>(s.lane);
  emit(e);
  ++stats_.lsf_events;
}

void FusionEngine::finalize_semantic_graph(std::size_t slot) {
  Slot& s = slots_.at(slot);
  const SemanticGraph& sg = sgs_[s.sg];
  if (s.gsf_done) throw std::logic_error("GSF ran twice for '" + sg.id + "'");
  if (s.finalized != sg.targets.size()) throw std::logic_error("GSF before every target finished LSF");
  s.gsf_done = true;

  double c = 1.0;
  if (behavior_.sf == SfKind::kHan) {
    const double w = sg.targets.empty() ? 0.0 : s.w_acc / static_cast<double>(sg.targets.size());
    c = std::exp(std::clamp(w, -kLogitClamp, kLogitClamp));
    if (layer_ + 1 == params_.num_layers) result_.w[s.sg] = w;
  }
  graph_weight_[s.sg] = c;
  beta_g_[sg.dst_type] += c;
  Matrix& acc = z_acc_[sg.dst_type];
  for (VertexId v : sg.targets) {
    auto z = s.z.row(v);
    auto out = acc.row(v);
    for (std::size_t j = 0; j < z.size(); ++j) out[j] += c * z[j];
    if (behavior_.sf == SfKind::kNone) continue;  // no explicit fusion stage
    TraceEvent e;
    e.stage = Stage::kGsf;
    e.a = v;
    e.sg = static_cast<std::uint16_t>(s.sg);
    e.vtype = static_cast<std::uint16_t>(sg.dst_type);
    e.width = params_.hidden_dim;
    e.lane = static_cast<std::uint16_t>(s.lane);
    emit(e);
    ++stats_.gsf_events;
  }
  if (layer_ + 1 == params_.num_layers) result_.z[s.sg] = std::move(s.z);
}

void FusionEngine::end_wave() {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (!slots_[i].gsf_done) throw std::logic_error("wave ended before GSF of every graph");
  }
  slots_.clear();
  fp_queue_.clear();
}

void FusionEngine::run_wave() {
  const std::size_t n = slots_.size();
  std::vector<std::uint64_t> sizes(n);
  std::vector<std::vector<QueuedEdge>> deferred(n);
  std::vector<std::uint64_t> consumed(n);
  auto work_left = [&] {
    if (!fp_queue_.empty()) return true;
    for (const Slot& s : slots_) {
      if (!s.queue.empty() || !s.gsf_done) return true;
    }
    return false;
  };
  while (work_left()) {
    next_round();
    drain_fp();
    for (std::size_t i = 0; i < n; ++i) sizes[i] = slots_[i].queue.size();
    const RoundPlan plan = plan_round(sizes, opt_.num_lanes, opt_.threshold, opt_.balance);
    std::fill(consumed.begin(), consumed.end(), 0);
    for (const LaneAssignment& a : plan.assignments) {
      Slot& s = slots_[a.list];
      for (std::uint64_t k = a.begin; k < a.begin + a.count; ++k) {
        const QueuedEdge q = s.queue[k];
        if (process_edge(a.list, {q.src, q.dst}, a.lane, q.attempt) == EdgeOutcome::kDeferred) {
          deferred[a.list].push_back({q.src, q.dst, static_cast<std::uint8_t>(std::min(q.attempt + 1, 255))});
        }
      }
      consumed[a.list] += a.count;
    }
    for (std::size_t i = 0; i < n; ++i) {
      Slot& s = slots_[i];
      s.queue.erase(s.queue.begin(), s.queue.begin() + static_cast<std::ptrdiff_t>(consumed[i]));
      for (const QueuedEdge& q : deferred[i]) s.queue.push_back(q);
      deferred[i].clear();
      std::vector<VertexId> ready;
      ready.swap(s.ready);
      for (VertexId v : ready) finalize_target(i, v);
      if (s.queue.empty() && !s.gsf_done && s.finalized == sgs_[s.sg].targets.size()) {
        finalize_semantic_graph(i);
      }
    }
  }
}

void FusionEngine::finish_layer() {
  for (std::size_t k = 0; k < sgs_.size(); ++k) {
    if (!visited_[k]) throw std::logic_error("layer finished before graph '" + sgs_[k].id + "' ran");
  }
  next_round();
  const bool last = layer_ + 1 == params_.num_layers;
  for (TypeId t : targets_) {
    const std::uint32_t count = g_.vertex_type(t).count;
    Matrix h(count, params_.hidden_dim);
    const Matrix& acc = z_acc_[t];
    const Matrix* w_self = behavior_.sf == SfKind::kSumWithSelf
                               ? &params_.at(key_self_weight(layer_, g_.vertex_type(t).name))
                               : nullptr;
    std::vector<double> self(params_.hidden_dim);
    for (VertexId v = 0; v < count; ++v) {
      auto out = h.row(v);
      auto in = acc.row(v);
      if (behavior_.divide_final) {
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = in[j] / beta_g_[t];
      } else {
        std::copy(in.begin(), in.end(), out.begin());
      }
      if (w_self) {
        project_row(*w_self, input_[t]->row(v), self);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += self[j];
        TraceEvent fp;
        fp.stage = Stage::kFp;
        fp.a = v;
        fp.vtype = static_cast<std::uint16_t>(t);
        fp.scope = kScopeSelf;
        fp.width = static_cast<std::uint32_t>(input_[t]->cols());
        fp.lane = static_cast<std::uint16_t>(v % opt_.num_lanes);
        emit(fp);
        ++stats_.fp_events;
      }
      round_row(out);
      TraceEvent e;
      e.stage = Stage::kFinal;
      e.a = v;
      e.vtype = static_cast<std::uint16_t>(t);
      e.width = params_.hidden_dim;
      e.lane = static_cast<std::uint16_t>(v % opt_.num_lanes);
      emit(e);
      ++stats_.final_events;
    }
    layer_out_[t] = std::move(h);
  }
  if (last) {
    for (std::size_t k = 0; k < sgs_.size(); ++k) {
      const TypeId t = sgs_[k].dst_type;
      switch (behavior_.sf) {
        case SfKind::kHan:
        case SfKind::kMean: result_.beta[k] = graph_weight_[k] / beta_g_[t]; break;
        default: result_.beta[k] = 1.0;
      }
    }
    for (TypeId t : targets_) result_.h[t] = layer_out_[t];
  }
  // The next layer reads the fused output of every target type.
  for (TypeId t : targets_) input_[t] = &layer_out_[t];
}

FusionResult FusionEngine::run(std::span<const std::size_t> order) {
  if (order.size() != sgs_.size()) throw std::invalid_argument("order must cover every semantic graph");
  std::vector<std::uint8_t> seen(sgs_.size(), 0);
  for (std::size_t k : order) {
    if (k >= sgs_.size() || seen[k]) throw std::invalid_argument("order is not a permutation");
    seen[k] = 1;
  }
  trace_.header.order.assign(order.begin(), order.end());
  for (std::uint32_t l = 0; l < params_.num_layers; ++l) {
    begin_layer(l);
    for (std::size_t first = 0; first < order.size(); first += opt_.num_lanes) {
      const std::size_t n = std::min<std::size_t>(opt_.num_lanes, order.size() - first);
      begin_wave(order.subspan(first, n));
      run_wave();
      end_wave();
    }
    finish_layer();
  }
  return take_result();
}

FusionResult FusionEngine::take_result() {
  FusionResult r;
  r.embeddings = std::move(result_);
  r.trace = std::move(trace_);
  r.stats = stats_;
  return r;
}

FusionResult run_fused(const HetGraph& g, const std::vector<SemanticGraph>& sgs,
                       const ModelParams& params, std::span<const std::size_t> order,
                       const FusionOptions& options) {
  FusionEngine engine(g, sgs, params, options);
  return engine.run(order);
}

std::vector<double> decomposed_softmax_aggregate(std::span<const double> logits,
                                                 const Matrix& rows) {
  if (logits.size() != rows.rows()) throw std::invalid_argument("one logit per row required");
  std::vector<double> num(rows.cols(), 0.0);
  double den = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double e = std::exp(std::clamp(logits[k], -kLogitClamp, kLogitClamp));
    auto r = rows.row(k);
    for (std::size_t j = 0; j < num.size(); ++j) num[j] += e * r[j];
    den += e;
  }
  for (double& x : num) x /= den;
  return num;
}

std::vector<double> direct_softmax_aggregate(std::span<const double> logits, const Matrix& rows) {
  if (logits.size() != rows.rows()) throw std::invalid_argument("one logit per row required");
  std::vector<double> clamped(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    clamped[k] = std::clamp(logits[k], -kLogitClamp, kLogitClamp);
  }
  const double mx = *std::max_element(clamped.begin(), clamped.end());
  double den = 0.0;
  for (double x : clamped) den += std::exp(x - mx);
  std::vector<double> out(rows.cols(), 0.0);
  for (std::size_t k = 0; k < clamped.size(); ++k) {
    const double alpha = std::exp(clamped[k] - mx) / den;
    auto r = rows.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += alpha * r[j];
  }
  return out;
}

}  // namespace hihgnn
