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

#include "hihgnn/perf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

#include "hihgnn/common.hpp"
#include "json.hpp"

namespace hihgnn {

void HardwareConfig::validate(std::uint32_t hidden_dim) const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("hardware field '") + name + "' must be positive");
  };
  positive(num_lanes, "num_lanes");
  positive(clock_hz, "clock_hz");
  positive(systolic_arrays_per_lane, "systolic_arrays_per_lane");
  positive(systolic_dim, "systolic_dim");
  positive(simd_cores_per_lane, "simd_cores_per_lane");
  positive(simd_width, "simd_width");
  positive(double(fp_buf_bytes), "fp_buf_bytes");
  positive(double(na_buf_bytes), "na_buf_bytes");
  positive(double(sf_buf_bytes), "sf_buf_bytes");
  positive(double(att_buf_bytes), "att_buf_bytes");
  positive(dram_bytes_per_cycle, "dram_bytes_per_cycle");
  positive(dram_energy_per_bit, "dram_energy_per_bit");
  positive(dram_line_bytes, "dram_line_bytes");
  positive(crossbar_bytes_per_cycle, "crossbar_bytes_per_cycle");
  positive(element_bytes, "element_bytes");
  positive(double(na_queue_capacity), "na_queue_capacity");
  positive(power_reference_lanes, "power_reference_lanes");
  positive(systolic_power_w, "systolic_power_w");
  positive(simd_power_w, "simd_power_w");
  positive(fp_buf_power_w, "fp_buf_power_w");
  positive(na_buf_power_w, "na_buf_power_w");
  positive(sf_buf_power_w, "sf_buf_power_w");
  positive(att_buf_power_w, "att_buf_power_w");
  positive(crossbar_power_w, "crossbar_power_w");
  const std::uint64_t row = std::uint64_t(hidden_dim) * element_bytes;
  for (auto [cap, name] : {std::pair{fp_buf_bytes, "fp_buf_bytes"}, std::pair{na_buf_bytes, "na_buf_bytes"},
                           std::pair{sf_buf_bytes, "sf_buf_bytes"}, std::pair{att_buf_bytes, "att_buf_bytes"}}) {
    if (cap < row) throw std::invalid_argument(std::string("hardware field '") + name + "' holds less than one feature row");
  }
}

std::uint64_t mvm_tiles(std::uint64_t rows, std::uint64_t cols, std::uint32_t dim) {
  return ((rows + dim - 1) / dim) * ((cols + dim - 1) / dim);
}

std::uint64_t batched_mvm_cycles(std::uint64_t tiles, std::uint64_t batch, std::uint64_t arrays_available,
                                 std::uint32_t dim) {
  if (tiles == 0 || batch == 0) return 0;
  if (arrays_available == 0) throw std::invalid_argument("no systolic arrays available");
  return (tiles + arrays_available - 1) / arrays_available * (dim + batch - 1);
}

std::uint64_t mvm_cycles(std::uint64_t rows, std::uint64_t cols, std::uint64_t arrays_available,
                         std::uint32_t dim, std::uint32_t fill) {
  const std::uint64_t c = batched_mvm_cycles(mvm_tiles(rows, cols, dim), 1, arrays_available, dim);
  return c == 0 ? 0 : c + fill;
}

std::uint64_t simd_cycles(std::uint64_t elements, std::uint64_t cores_available, std::uint32_t width) {
  if (elements == 0) return 0;
  const std::uint64_t per_cycle = cores_available * width;
  if (per_cycle == 0) throw std::invalid_argument("no SIMD lanes available");
  return (elements + per_cycle - 1) / per_cycle;
}

// ---- BufferModel ---------------------------------------------------------

BufferModel::BufferModel(std::uint64_t capacity_bytes, std::uint32_t line_bytes)
    : capacity_(capacity_bytes), line_(line_bytes) {
  if (line_bytes == 0) throw std::invalid_argument("line size must be positive");
}

std::uint64_t BufferModel::lines(std::uint64_t bytes) const {
  return (bytes + line_ - 1) / line_ * line_;
}

void BufferModel::touch(std::list<Entry>::iterator it) { lru_.splice(lru_.begin(), lru_, it); }

BufferModel::Access BufferModel::insert(std::uint64_t key, std::uint64_t bytes, bool dirty) {
  Access a;
  const std::uint64_t size = lines(bytes);
  if (size > capacity_) {
    // Does not fit at all: the data streams through and goes back out.
    if (dirty) {
      a.dram_write += size;
      stored_[key] = 1;
    }
    return a;
  }
  while (resident_ + size > capacity_) {
    Entry& victim = lru_.back();
    if (victim.dirty) {
      a.dram_write += victim.bytes;
      stored_[victim.key] = 1;
    }
    resident_ -= victim.bytes;
    index_.erase(victim.key);
    lru_.pop_back();
  }
  lru_.push_front({key, size, dirty});
  index_[key] = lru_.begin();
  resident_ += size;
  return a;
}

BufferModel::Access BufferModel::read(std::uint64_t key, std::uint64_t bytes) {
  auto it = index_.find(key);
  if (it != index_.end()) {
    ++hits_;
    touch(it->second);
    return {true, 0, 0};
  }
  ++misses_;
  Access a = insert(key, bytes, false);
  a.dram_read += lines(bytes);
  return a;
}

BufferModel::Access BufferModel::update(std::uint64_t key, std::uint64_t bytes) {
  auto it = index_.find(key);
  if (it != index_.end()) {
    ++hits_;
    it->second->dirty = true;
    touch(it->second);
    return {true, 0, 0};
  }
  ++misses_;
  const bool spilled = stored_.count(key) != 0;
  Access a = insert(key, bytes, true);
  if (spilled) a.dram_read += lines(bytes);
  return a;
}

BufferModel::Access BufferModel::install(std::uint64_t key, std::uint64_t bytes) {
  auto it = index_.find(key);
  if (it != index_.end()) {
    it->second->dirty = true;
    touch(it->second);
    return {};
  }
  return insert(key, bytes, true);
}

void BufferModel::erase(std::uint64_t key) {
  auto it = index_.find(key);
  if (it != index_.end()) {
    resident_ -= it->second->bytes;
    lru_.erase(it->second);
    index_.erase(it);
  }
  stored_.erase(key);
}

// ---- replay --------------------------------------------------------------

std::string_view stage_group_name(StageGroup s) {
  static constexpr std::string_view names[] = {"FP", "NA", "LSF", "GSF", "FINAL"};
  return names[static_cast<int>(s)];
}

StageGroup stage_group(Stage s) {
  switch (s) {
    case Stage::kFp: return StageGroup::kFp;
    case Stage::kTheta:
    case Stage::kNa:
    case Stage::kSync: return StageGroup::kNa;
    case Stage::kLsf: return StageGroup::kLsf;
    case Stage::kGsf: return StageGroup::kGsf;
    case Stage::kFinal: return StageGroup::kFinal;
  }
  return StageGroup::kFp;
}

namespace {

enum KeyKind : std::uint64_t { kKeyProj = 1, kKeyTheta = 2, kKeyPartial = 3, kKeyZ = 4, kKeyGlobal = 5, kKeyScalar = 6 };

std::uint64_t make_key(KeyKind kind, std::uint32_t layer, std::uint32_t mid, std::uint32_t v) {
  return (std::uint64_t(kind) << 61) | (std::uint64_t(layer & 0x1F) << 56) |
         (std::uint64_t(mid & 0xFFFFFF) << 32) | v;
}

// Vectors multiplied by one weight matrix on one lane within a step.
struct MvmGroup {
  std::uint64_t weight = 0;
  std::uint64_t tiles = 0;
  std::uint64_t batch = 0;
};

// Work of one step, split by stage group so fused replay can also report
// what each stage would cost on its own.
struct Work {
  std::vector<std::vector<MvmGroup>> mvm;
  std::vector<std::uint64_t> simd;
  std::vector<std::uint64_t> port_bytes;
  std::uint64_t dram = 0;
  bool any = false;

  explicit Work(std::uint32_t lanes) : mvm(lanes), simd(lanes, 0), port_bytes(lanes, 0) {}
  void clear() {
    for (auto& m : mvm) m.clear();
    std::fill(simd.begin(), simd.end(), 0);
    std::fill(port_bytes.begin(), port_bytes.end(), 0);
    dram = 0;
    any = false;
  }
  void add_mvm(std::uint32_t lane, std::uint64_t weight, std::uint64_t tiles) {
    any = true;
    for (MvmGroup& g : mvm[lane]) {
      if (g.weight == weight) {
        ++g.batch;
        return;
      }
    }
    mvm[lane].push_back({weight, tiles, 1});
  }
};

struct StepCost {
  std::uint64_t cycles = 0;
  std::vector<std::uint64_t> lane_cycles, sys_cycles, simd_cycles;
  std::uint64_t xbar_cycles = 0;
};

StepCost cost_of(const Work& w, const HardwareConfig& cfg) {
  StepCost c;
  const std::uint32_t n = static_cast<std::uint32_t>(w.simd.size());
  c.lane_cycles.assign(n, 0);
  c.sys_cycles.assign(n, 0);
  c.simd_cycles.assign(n, 0);
  for (std::uint32_t l = 0; l < n; ++l) {
    for (const MvmGroup& g : w.mvm[l]) {
      c.sys_cycles[l] += batched_mvm_cycles(g.tiles, g.batch, cfg.systolic_arrays_per_lane, cfg.systolic_dim);
    }
    if (c.sys_cycles[l] > 0) c.sys_cycles[l] += cfg.systolic_fill_cycles;
    c.simd_cycles[l] = simd_cycles(w.simd[l], cfg.simd_cores_per_lane, cfg.simd_width);
    c.lane_cycles[l] = std::max(c.sys_cycles[l], c.simd_cycles[l]);
    c.cycles = std::max(c.cycles, c.lane_cycles[l]);
    const auto x = static_cast<std::uint64_t>(std::ceil(double(w.port_bytes[l]) / cfg.crossbar_bytes_per_cycle));
    c.xbar_cycles = std::max(c.xbar_cycles, x);
  }
  const auto dram = static_cast<std::uint64_t>(std::ceil(double(w.dram) / cfg.dram_bytes_per_cycle));
  c.cycles = std::max({c.cycles, dram, c.xbar_cycles});
  return c;
}

int stage_rank(Stage s) {
  switch (s) {
    case Stage::kFp: return 0;
    case Stage::kTheta:
    case Stage::kNa:
    case Stage::kSync: return 1;
    case Stage::kLsf: return 2;
    case Stage::kGsf: return 3;
    case Stage::kFinal: return 4;
  }
  return 0;
}

class Replayer {
 public:
  Replayer(const Trace& t, const HardwareConfig& cfg)
      : t_(t),
        cfg_(cfg),
        lanes_(cfg.num_lanes),
        hidden_bytes_(std::uint64_t(t.header.hidden_dim) * cfg.element_bytes),
        fp_buf_(cfg.fp_buf_bytes, cfg.dram_line_bytes),
        na_buf_(cfg.na_buf_bytes, cfg.dram_line_bytes),
        sf_buf_(cfg.sf_buf_bytes, cfg.dram_line_bytes),
        att_buf_(cfg.att_buf_bytes, cfg.dram_line_bytes) {
    attention_ = t.header.model != "R-GCN";
    han_ = t.header.model == "HAN";
    for (int g = 0; g < kNumStageGroups; ++g) stage_work_.emplace_back(lanes_);
  }

  MetricsReport run(ReplayMode mode) {
    MetricsReport r;
    r.mode = mode == ReplayMode::kFused ? "fused" : "staged";
    r.model = t_.header.model;
    r.num_lanes = lanes_;
    r.events = t_.events.size();
    lane_busy_.assign(lanes_, 0);

    std::vector<std::size_t> order(t_.events.size());
    std::iota(order.begin(), order.end(), 0);
    if (mode == ReplayMode::kStaged) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const TraceEvent& x = t_.events[a];
        const TraceEvent& y = t_.events[b];
        return std::tuple(x.layer, stage_rank(x.stage)) < std::tuple(y.layer, stage_rank(y.stage));
      });
    }

    Work work(lanes_);
    auto step_key = [&](const TraceEvent& e) {
      return mode == ReplayMode::kFused ? std::tuple(e.layer, 0, e.round)
                                        : std::tuple(e.layer, stage_rank(e.stage), e.round);
    };
    std::size_t i = 0;
    while (i < order.size()) {
      const auto key = step_key(t_.events[order[i]]);
      work.clear();
      for (auto& sw : stage_work_) sw.clear();
      std::size_t j = i;
      for (; j < order.size() && step_key(t_.events[order[j]]) == key; ++j) {
        apply(t_.events[order[j]], work, r);
      }
      const StepCost c = cost_of(work, cfg_);
      r.total_cycles += c.cycles;
      ++r.rounds;
      for (std::uint32_t l = 0; l < lanes_; ++l) {
        lane_busy_[l] += c.lane_cycles[l];
        r.systolic_busy_cycles += c.sys_cycles[l];
        r.simd_busy_cycles += c.simd_cycles[l];
      }
      r.crossbar_busy_cycles += c.xbar_cycles;
      for (int g = 0; g < kNumStageGroups; ++g) {
        if (stage_work_[g].any) r.stage_cycles[g] += cost_of(stage_work_[g], cfg_).cycles;
      }
      i = j;
    }

    auto stats = [](const BufferModel& b) { return BufferStats{b.hits(), b.misses(), b.hit_rate()}; };
    r.fp_buf = stats(fp_buf_);
    r.na_buf = stats(na_buf_);
    r.sf_buf = stats(sf_buf_);
    r.att_buf = stats(att_buf_);
    for (std::uint32_t l = 0; l < lanes_; ++l) {
      r.lane_busy_fraction.push_back(r.total_cycles == 0 ? 0.0 : double(lane_busy_[l]) / double(r.total_cycles));
    }
    r.seconds = double(r.total_cycles) / cfg_.clock_hz;
    r.energy = energy(r, cfg_);
    return r;
  }

 private:
  std::uint64_t line_round(std::uint64_t bytes) const {
    return (bytes + cfg_.dram_line_bytes - 1) / cfg_.dram_line_bytes * cfg_.dram_line_bytes;
  }

  void dram(Work& w, Work& sw, MetricsReport& r, std::uint64_t read, std::uint64_t write) {
    r.dram_bytes_read += read;
    r.dram_bytes_written += write;
    w.dram += read + write;
    sw.dram += read + write;
    if (read + write > 0) w.any = sw.any = true;
  }
  void dram(Work& w, Work& sw, MetricsReport& r, const BufferModel::Access& a) {
    dram(w, sw, r, a.dram_read, a.dram_write);
  }
  void simd(Work& w, Work& sw, std::uint32_t lane, std::uint64_t elems) {
    w.simd[lane] += elems;
    sw.simd[lane] += elems;
    w.any = sw.any = true;
  }
  void mvm(Work& w, Work& sw, std::uint32_t lane, std::uint64_t weight, std::uint64_t tiles) {
    w.add_mvm(lane, weight, tiles);
    sw.add_mvm(lane, weight, tiles);
  }

  // Each weight matrix comes from DRAM once per layer; returns its id.
  std::uint64_t load_weight(Work& w, Work& sw, MetricsReport& r, std::uint32_t layer, std::uint32_t scope,
                            std::uint32_t type, std::uint64_t rows, std::uint64_t cols) {
    const std::uint64_t id = (std::uint64_t(layer) << 40) | (std::uint64_t(scope) << 16) | type;
    if (weights_.insert(id).second) dram(w, sw, r, line_round(rows * cols * cfg_.element_bytes), 0);
    return id;
  }

  void apply(const TraceEvent& e, Work& w, MetricsReport& r) {
    if (e.lane >= lanes_) throw std::invalid_argument("trace event on lane " + std::to_string(e.lane));
    Work& sw = stage_work_[static_cast<int>(stage_group(e.stage))];
    const std::uint32_t hidden = t_.header.hidden_dim;
    const std::uint64_t eb = cfg_.element_bytes;
    const std::uint32_t lane = e.lane;
    switch (e.stage) {
      case Stage::kFp: {
        const std::uint64_t weight = load_weight(w, sw, r, e.layer, e.scope, e.vtype, hidden, e.width);
        const std::uint64_t raw = line_round(std::uint64_t(e.width) * eb);
        r.raw_feature_bytes += raw;
        dram(w, sw, r, raw, 0);
        mvm(w, sw, lane, weight, mvm_tiles(hidden, e.width, cfg_.systolic_dim));
        if (e.scope != kScopeSelf) {
          dram(w, sw, r, fp_buf_.install(make_key(kKeyProj, e.layer, (std::uint32_t(e.scope) << 8) | e.vtype, e.a),
                                         hidden_bytes_));
        }
        break;
      }
      case Stage::kTheta: {
        dram(w, sw, r, fp_buf_.read(make_key(kKeyProj, e.layer, (std::uint32_t(e.scope) << 8) | e.vtype, e.a),
                                    hidden_bytes_));
        // theta = a . h' runs on the systolic arrays as a 1 x hidden product
        const std::uint64_t weight = load_weight(w, sw, r, e.layer, e.sg, 0x100u | e.role, 1, hidden);
        mvm(w, sw, lane, weight, mvm_tiles(1, hidden, cfg_.systolic_dim));
        dram(w, sw, r, att_buf_.install(make_key(kKeyTheta, e.layer, (std::uint32_t(e.sg) << 1) | e.role, e.a), eb));
        break;
      }
      case Stage::kNa: {
        dram(w, sw, r, 8, 0);  // edge record streamed from the CSC arrays
        if (e.reuse == Reuse::kMiss) {
          simd(w, sw, lane, 1);
          break;
        }
        const std::uint32_t src_type = t_.header.graphs.at(e.sg).src_type;
        dram(w, sw, r, fp_buf_.read(make_key(kKeyProj, e.layer, (std::uint32_t(e.scope) << 8) | src_type, e.a),
                                    hidden_bytes_));
        if (attention_) {
          dram(w, sw, r, att_buf_.read(make_key(kKeyTheta, e.layer, std::uint32_t(e.sg) << 1, e.a), eb));
          dram(w, sw, r, att_buf_.read(make_key(kKeyTheta, e.layer, (std::uint32_t(e.sg) << 1) | 1, e.b), eb));
        }
        dram(w, sw, r, na_buf_.update(make_key(kKeyPartial, e.layer, (std::uint32_t(e.sg) << 8) | lane, e.b),
                                      hidden_bytes_ + eb));
        simd(w, sw, lane, attention_ ? 3ull * hidden + 4 : hidden + 1ull);
        break;
      }
      case Stage::kSync: {
        const std::uint64_t helper = make_key(kKeyPartial, e.layer, (std::uint32_t(e.sg) << 8) | e.lane, e.a);
        dram(w, sw, r, na_buf_.read(helper, hidden_bytes_ + eb));
        na_buf_.erase(helper);
        dram(w, sw, r, na_buf_.update(make_key(kKeyPartial, e.layer, (std::uint32_t(e.sg) << 8) | e.b, e.a),
                                      hidden_bytes_ + eb));
        const std::uint64_t bytes = hidden_bytes_ + eb;
        w.port_bytes[e.lane] += bytes;
        sw.port_bytes[e.lane] += bytes;
        w.port_bytes[e.b] += bytes;
        sw.port_bytes[e.b] += bytes;
        w.any = sw.any = true;
        r.crossbar_bytes += bytes;
        simd(w, sw, e.b, hidden + 1ull);
        break;
      }
      case Stage::kLsf: {
        const std::uint64_t partial = make_key(kKeyPartial, e.layer, (std::uint32_t(e.sg) << 8) | lane, e.a);
        dram(w, sw, r, na_buf_.read(partial, hidden_bytes_ + eb));
        na_buf_.erase(partial);
        dram(w, sw, r, na_buf_.install(make_key(kKeyZ, e.layer, e.sg, e.a), hidden_bytes_));
        simd(w, sw, lane, 2ull * hidden);
        if (han_) {
          const std::uint64_t weight = load_weight(w, sw, r, e.layer, 0xFFFF, 0xFF, hidden, hidden);
          mvm(w, sw, lane, weight, mvm_tiles(hidden, hidden, cfg_.systolic_dim));
          simd(w, sw, lane, 3ull * hidden);
          dram(w, sw, r, sf_buf_.update(make_key(kKeyScalar, e.layer, e.sg, 0), eb));
        }
        break;
      }
      case Stage::kGsf: {
        const std::uint64_t z = make_key(kKeyZ, e.layer, e.sg, e.a);
        dram(w, sw, r, na_buf_.read(z, hidden_bytes_));
        na_buf_.erase(z);
        dram(w, sw, r, na_buf_.update(make_key(kKeyGlobal, e.layer, e.vtype, e.a), hidden_bytes_));
        dram(w, sw, r, sf_buf_.update(make_key(kKeyScalar, e.layer, 0x10000u | e.vtype, 0), eb));
        simd(w, sw, lane, 2ull * hidden);
        break;
      }
      case Stage::kFinal: {
        const std::uint64_t g = make_key(kKeyGlobal, e.layer, e.vtype, e.a);
        dram(w, sw, r, na_buf_.update(g, hidden_bytes_));
        na_buf_.erase(g);
        simd(w, sw, lane, hidden);
        dram(w, sw, r, 0, line_round(hidden_bytes_));
        break;
      }
    }
  }

  const Trace& t_;
  const HardwareConfig& cfg_;
  std::uint32_t lanes_;
  std::uint64_t hidden_bytes_;
  bool attention_ = true;
  bool han_ = false;
  BufferModel fp_buf_, na_buf_, sf_buf_, att_buf_;
  std::vector<Work> stage_work_;
  std::vector<std::uint64_t> lane_busy_;
  std::unordered_set<std::uint64_t> weights_;
};

}  // namespace

MetricsReport replay(const Trace& trace, const HardwareConfig& cfg, ReplayMode mode) {
  cfg.validate(trace.header.hidden_dim);
  if (trace.header.num_lanes != cfg.num_lanes) {
    throw std::invalid_argument("trace was recorded for " + std::to_string(trace.header.num_lanes) +
                                " lanes but the hardware has " + std::to_string(cfg.num_lanes));
  }
  if (cfg.num_lanes > 255) throw std::invalid_argument("at most 255 lanes");
  if (trace.header.type_names.size() > 255) throw std::invalid_argument("at most 255 vertex types");
  std::string why;
  if (!trace.events.empty() && !trace_closes(trace, &why)) {
    throw std::invalid_argument("trace does not close: " + why);
  }
  return Replayer(trace, cfg).run(mode);
}

EnergyBreakdown energy(const MetricsReport& r, const HardwareConfig& cfg) {
  EnergyBreakdown e;
  e.dram = double(r.dram_bytes()) * 8.0 * cfg.dram_energy_per_bit;
  const double per_lane = 1.0 / double(cfg.power_reference_lanes);
  e.systolic = cfg.systolic_power_w * per_lane * double(r.systolic_busy_cycles) / cfg.clock_hz;
  e.simd = cfg.simd_power_w * per_lane * double(r.simd_busy_cycles) / cfg.clock_hz;
  e.buffers = (cfg.fp_buf_power_w + cfg.na_buf_power_w + cfg.sf_buf_power_w + cfg.att_buf_power_w) *
              double(r.total_cycles) / cfg.clock_hz;
  e.crossbar = cfg.crossbar_power_w * double(r.crossbar_busy_cycles) / cfg.clock_hz;
  return e;
}

std::string metrics_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = MetricsReport::kSchemaVersion;
  j["mode"] = r.mode;
  j["model"] = r.model;
  j["num_lanes"] = r.num_lanes;
  j["rounds"] = r.rounds;
  j["events"] = r.events;
  j["total_cycles"] = r.total_cycles;
  j["seconds"] = r.seconds;
  nlohmann::ordered_json stages;
  for (int g = 0; g < kNumStageGroups; ++g) {
    stages[std::string(stage_group_name(static_cast<StageGroup>(g)))] = r.stage_cycles[g];
  }
  j["stage_cycles"] = std::move(stages);
  j["dram_bytes_read"] = r.dram_bytes_read;
  j["dram_bytes_written"] = r.dram_bytes_written;
  j["raw_feature_bytes"] = r.raw_feature_bytes;
  j["crossbar_bytes"] = r.crossbar_bytes;
  auto buf = [](const BufferStats& b) {
    return nlohmann::ordered_json{{"hits", b.hits}, {"misses", b.misses}, {"hit_rate", b.hit_rate}};
  };
  j["buffers"] = {{"FP-Buf", buf(r.fp_buf)}, {"NA-Buf", buf(r.na_buf)}, {"SF-Buf", buf(r.sf_buf)},
                  {"Att-Buf", buf(r.att_buf)}};
  j["lane_busy_fraction"] = r.lane_busy_fraction;
  j["systolic_busy_cycles"] = r.systolic_busy_cycles;
  j["simd_busy_cycles"] = r.simd_busy_cycles;
  j["crossbar_busy_cycles"] = r.crossbar_busy_cycles;
  j["energy_j"] = {{"dram", r.energy.dram},         {"systolic", r.energy.systolic},
                   {"simd", r.energy.simd},         {"buffers", r.energy.buffers},
                   {"crossbar", r.energy.crossbar}, {"total", r.energy.total()}};
  return j.dump(2) + "\n";
}

std::string metrics_csv_header() {
  return "mode,model,num_lanes,rounds,total_cycles,cycles_fp,cycles_na,cycles_lsf,cycles_gsf,cycles_final,"
         "dram_bytes_read,dram_bytes_written,fp_buf_hit_rate,na_buf_hit_rate,sf_buf_hit_rate,att_buf_hit_rate,"
         "mean_lane_busy,energy_dram_j,energy_systolic_j,energy_simd_j,energy_buffers_j,energy_crossbar_j,"
         "energy_total_j";
}

std::string metrics_to_csv_row(const MetricsReport& r) {
  std::string s = r.mode + ',' + r.model + ',' + std::to_string(r.num_lanes) + ',' + std::to_string(r.rounds) +
                  ',' + std::to_string(r.total_cycles);
  for (std::uint64_t c : r.stage_cycles) s += ',' + std::to_string(c);
  s += ',' + std::to_string(r.dram_bytes_read) + ',' + std::to_string(r.dram_bytes_written);
  for (const BufferStats* b : {&r.fp_buf, &r.na_buf, &r.sf_buf, &r.att_buf}) s += ',' + format_double(b->hit_rate);
  double busy = 0.0;
  for (double f : r.lane_busy_fraction) busy += f;
  if (!r.lane_busy_fraction.empty()) busy /= double(r.lane_busy_fraction.size());
  s += ',' + format_double(busy);
  for (double e : {r.energy.dram, r.energy.systolic, r.energy.simd, r.energy.buffers, r.energy.crossbar,
                   r.energy.total()}) {
    s += ',' + format_double(e);
  }
  return s;
}

}  // namespace hihgnn
