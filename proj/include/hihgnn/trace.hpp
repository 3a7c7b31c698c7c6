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
 * @file trace.hpp
 * @brief Event trace emitted by the fusion engine and replayed by the
 *        performance model.
 *
 * Field use per stage:
 *
 *   FP     a = vertex, vtype, scope, width = input width, role = endpoint
 *   THETA  a = vertex, vtype, sg, role = 0 source half / 1 target half
 *   NA     a = source, b = target, sg, reuse, role = attempt number
 *   SYNC   a = target, sg, lane = helper lane, b = native lane
 *   LSF    a = target, vtype, sg
 *   GSF    a = target, vtype, sg
 *   FINAL  a = vertex, vtype
 *
 * `round` numbers are global and non-decreasing along the trace; every event
 * of one round is contiguous.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hihgnn {

enum class Stage : std::uint8_t { kFp, kTheta, kNa, kLsf, kGsf, kFinal, kSync };
inline constexpr int kNumStages = 7;

/// NA outcome. kMiss marks a deferred attempt (endpoint not projected yet);
/// kNone is used when reuse tracking is disabled.
enum class Reuse : std::uint8_t { kNone, kMiss, kFpHit, kFullHit };

std::string_view stage_name(Stage s);
Stage parse_stage(std::string_view s);
std::string_view reuse_name(Reuse r);
Reuse parse_reuse(std::string_view s);

/// Scope tags for FP events. Relation scopes are kScopeRelationBase + id.
inline constexpr std::uint16_t kScopeType = 0;
inline constexpr std::uint16_t kScopeRelationBase = 1;
inline constexpr std::uint16_t kScopeSelf = 0xFFFE;
inline constexpr std::uint16_t kNoSg = 0xFFFF;

struct TraceEvent {
  std::uint32_t round = 0;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint32_t width = 0;
  std::uint16_t lane = 0;
  std::uint16_t sg = kNoSg;
  std::uint16_t vtype = 0;
  std::uint16_t scope = kScopeType;
  std::uint8_t layer = 0;
  Stage stage = Stage::kFp;
  Reuse reuse = Reuse::kNone;
  std::uint8_t role = 0;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

struct TraceGraphInfo {
  std::string id;
  std::uint32_t src_type = 0;
  std::uint32_t dst_type = 0;
  std::uint64_t num_edges = 0;
  std::uint64_t num_targets = 0;

  friend bool operator==(const TraceGraphInfo&, const TraceGraphInfo&) = default;
};

struct TraceHeader {
  std::string model;
  std::uint32_t hidden_dim = 64;
  std::uint32_t element_bytes = 4;
  std::uint32_t num_lanes = 1;
  std::uint32_t num_layers = 1;
  std::uint64_t threshold = 1;
  bool rab = true;
  bool balance = true;
  std::vector<std::string> type_names;
  std::vector<std::uint32_t> type_counts;
  std::vector<TraceGraphInfo> graphs;
  std::vector<std::uint32_t> order;

  friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
};

struct Trace {
  TraceHeader header;
  std::vector<TraceEvent> events;

  std::uint32_t num_rounds() const { return events.empty() ? 0 : events.back().round + 1; }
};

/// Newline-delimited JSON: one header object, then one object per event.
void write_trace(std::ostream& out, const Trace& t);
Trace read_trace(std::istream& in, const std::string& source = "<trace>");

/// Per layer, completed NA events equal the summed edge counts of the
/// semantic graphs, and every round is contiguous.
bool trace_closes(const Trace& t, std::string* why = nullptr);

}  // namespace hihgnn
