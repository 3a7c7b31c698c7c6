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
 * @file perf.hpp
 * @brief Throughput-level timing, traffic and energy model replayed over an
 *        engine trace.
 *
 * Time advances in rounds. Within a round every lane owns a systolic module
 * (projections, semantic-attention transforms) and a SIMD module (attention
 * scores, aggregation, divisions, activations); DRAM and the crossbar are
 * shared. Fused replay charges each round max(slowest lane, DRAM, crossbar).
 * Staged replay regroups the same events stage by stage within each layer,
 * so stages can no longer overlap and the buffers see stage-ordered reuse.
 */

#pragma once

#include <array>
#include <cstdint>
#include <list>
#include <string>
#include <unordered_map>
#include <vector>

#include "hihgnn/trace.hpp"

namespace hihgnn {

inline constexpr std::uint64_t kMiB = 1024 * 1024;

struct HardwareConfig {
  std::uint32_t num_lanes = 4;
  double clock_hz = 1e9;
  std::uint32_t systolic_arrays_per_lane = 96;
  std::uint32_t systolic_dim = 8;          // arrays are dim x dim MACs
  std::uint32_t systolic_fill_cycles = 16;  // per activation
  std::uint32_t simd_cores_per_lane = 128;
  std::uint32_t simd_width = 8;
  std::uint64_t fp_buf_bytes = static_cast<std::uint64_t>(2.44 * kMiB);
  std::uint64_t na_buf_bytes = static_cast<std::uint64_t>(14.52 * kMiB);
  std::uint64_t sf_buf_bytes = static_cast<std::uint64_t>(0.12 * kMiB);
  std::uint64_t att_buf_bytes = static_cast<std::uint64_t>(0.38 * kMiB);
  double dram_bytes_per_cycle = 512.0;
  double dram_energy_per_bit = 7e-12;
  std::uint32_t dram_line_bytes = 64;
  double crossbar_bytes_per_cycle = 64.0;  // per port
  std::uint32_t element_bytes = 4;
  std::uint64_t na_queue_capacity = 256;  // default lane threshold

  // Module power in watts for the reference lane count.
  std::uint32_t power_reference_lanes = 4;
  double systolic_power_w = 6.7584;
  double simd_power_w = 3.2768;
  double fp_buf_power_w = 0.2029;
  double na_buf_power_w = 1.20742;
  double sf_buf_power_w = 0.00998;
  double att_buf_power_w = 0.0316;
  double crossbar_power_w = 0.44082;

  /// Throws std::invalid_argument naming the first non-positive field.
  void validate(std::uint32_t hidden_dim = 64) const;
};

/// ceil(rows/dim) * ceil(cols/dim) weight tiles of dim x dim.
std::uint64_t mvm_tiles(std::uint64_t rows, std::uint64_t cols, std::uint32_t dim = 8);
/// Weight-stationary batch of `batch` vectors against one weight matrix of
/// `tiles` tiles: each array holds a tile while the vectors stream through,
/// so a pass costs dim + batch - 1 cycles. No fill/drain term.
std::uint64_t batched_mvm_cycles(std::uint64_t tiles, std::uint64_t batch, std::uint64_t arrays_available,
                                 std::uint32_t dim = 8);
/// One vector, including one fill/drain. Zero work costs zero.
std::uint64_t mvm_cycles(std::uint64_t rows, std::uint64_t cols, std::uint64_t arrays_available,
                         std::uint32_t dim = 8, std::uint32_t fill = 16);
/// ceil(elements / (cores * width)).
std::uint64_t simd_cycles(std::uint64_t elements, std::uint64_t cores_available,
                          std::uint32_t width = 8);

/// Least-recently-used buffer over variable-size entries. Entries written
/// on chip are dirty and cost a write-back when evicted; a later miss on
/// such a key reads it back from DRAM.
class BufferModel {
 public:
  struct Access {
    bool hit = false;
    std::uint64_t dram_read = 0;
    std::uint64_t dram_write = 0;
  };

  explicit BufferModel(std::uint64_t capacity_bytes, std::uint32_t line_bytes = 64);

  /// Read `bytes` under `key`; a miss fetches from DRAM and installs.
  Access read(std::uint64_t key, std::uint64_t bytes);
  /// Read-modify-write: like read, but a miss on a key never stored before
  /// is a cold allocation with no DRAM read. Marks the entry dirty.
  Access update(std::uint64_t key, std::uint64_t bytes);
  /// Install freshly produced data (dirty), no DRAM read.
  Access install(std::uint64_t key, std::uint64_t bytes);
  /// Drop an entry whose data is dead; no write-back.
  void erase(std::uint64_t key);
  bool contains(std::uint64_t key) const { return index_.count(key) != 0; }

  std::uint64_t capacity() const noexcept { return capacity_; }
  std::uint64_t resident_bytes() const noexcept { return resident_; }
  std::uint64_t hits() const noexcept { return hits_; }
  std::uint64_t misses() const noexcept { return misses_; }
  double hit_rate() const noexcept {
    return hits_ + misses_ == 0 ? 0.0 : double(hits_) / double(hits_ + misses_);
  }

 private:
  struct Entry {
    std::uint64_t key;
    std::uint64_t bytes;
    bool dirty;
  };
  std::uint64_t lines(std::uint64_t bytes) const;
  void touch(std::list<Entry>::iterator it);
  Access insert(std::uint64_t key, std::uint64_t bytes, bool dirty);

  std::uint64_t capacity_;
  std::uint32_t line_;
  std::uint64_t resident_ = 0;
  std::uint64_t hits_ = 0;
  std::uint64_t misses_ = 0;
  std::list<Entry> lru_;  // front = most recent
  std::unordered_map<std::uint64_t, std::list<Entry>::iterator> index_;
  std::unordered_map<std::uint64_t, std::uint8_t> stored_;  // keys written back at least once
};

enum class ReplayMode { kFused, kStaged };

enum class StageGroup { kFp, kNa, kLsf, kGsf, kFinal };
inline constexpr int kNumStageGroups = 5;
std::string_view stage_group_name(StageGroup s);
StageGroup stage_group(Stage s);

struct BufferStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  double hit_rate = 0.0;
};

struct EnergyBreakdown {
  double dram = 0.0;
  double systolic = 0.0;
  double simd = 0.0;
  double buffers = 0.0;
  double crossbar = 0.0;
  double total() const { return dram + systolic + simd + buffers + crossbar; }
};

struct MetricsReport {
  static constexpr int kSchemaVersion = 1;
  std::string mode;
  std::string model;
  std::uint32_t num_lanes = 0;
  std::uint64_t rounds = 0;
  std::uint64_t events = 0;
  std::uint64_t total_cycles = 0;
  std::array<std::uint64_t, kNumStageGroups> stage_cycles{};
  std::uint64_t dram_bytes_read = 0;
  std::uint64_t dram_bytes_written = 0;
  std::uint64_t raw_feature_bytes = 0;  // part of dram_bytes_read spent on FP inputs
  std::uint64_t crossbar_bytes = 0;
  BufferStats fp_buf, na_buf, sf_buf, att_buf;
  std::vector<double> lane_busy_fraction;
  std::uint64_t systolic_busy_cycles = 0;  // summed over lanes
  std::uint64_t simd_busy_cycles = 0;      // summed over lanes
  std::uint64_t crossbar_busy_cycles = 0;
  EnergyBreakdown energy;
  double seconds = 0.0;

  std::uint64_t dram_bytes() const { return dram_bytes_read + dram_bytes_written; }
};

/// Replays `trace`. Throws std::invalid_argument when the trace was recorded
/// for a different lane count than `cfg` or does not close.
MetricsReport replay(const Trace& trace, const HardwareConfig& cfg, ReplayMode mode);

/// Energy from the accumulated counters of a report.
EnergyBreakdown energy(const MetricsReport& r, const HardwareConfig& cfg);

std::string metrics_to_json(const MetricsReport& r);
std::string metrics_csv_header();
std::string metrics_to_csv_row(const MetricsReport& r);

}  // namespace hihgnn
