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

#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "hihgnn/fusion.hpp"
#include "hihgnn/perf.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace hihgnn;

namespace {

Trace bare_trace(const std::string& model, std::uint32_t hidden, std::uint32_t lanes) {
  Trace t;
  t.header.model = model;
  t.header.hidden_dim = hidden;
  t.header.num_lanes = lanes;
  t.header.num_layers = 1;
  t.header.type_names = {"A"};
  t.header.type_counts = {4};
  return t;
}

struct Run {
  FusionResult fused;
  MetricsReport fused_report;
  MetricsReport staged_report;
};

Run simulate(const HetGraph& g, ModelKind kind, std::uint32_t lanes, bool rab = true,
             std::uint64_t threshold = 256, std::uint32_t hidden = 16) {
  auto sgs = select_semantic_graphs(g, kind);
  ModelParams p = generate_params(kind, g, sgs, 1, hidden, 1);
  std::vector<std::size_t> order(sgs.size());
  std::iota(order.begin(), order.end(), 0);
  FusionOptions opt;
  opt.num_lanes = lanes;
  opt.rab = rab;
  opt.threshold = threshold;
  Run r;
  r.fused = run_fused(g, sgs, p, order, opt);
  HardwareConfig cfg;
  cfg.num_lanes = lanes;
  r.fused_report = replay(r.fused.trace, cfg, ReplayMode::kFused);
  r.staged_report = replay(r.fused.trace, cfg, ReplayMode::kStaged);
  return r;
}

}  // namespace

TEST_SUITE("perf") {

TEST_CASE("systolic and SIMD cost formulas") {
  CHECK(mvm_tiles(64, 64) == 64);
  CHECK(mvm_tiles(9, 8) == 2);
  CHECK(mvm_cycles(8, 8, 1) == 8 + 16);
  CHECK(mvm_cycles(64, 64, 1) == 64 * 8 + 16);
  CHECK(mvm_cycles(64, 64, 64) == 8 + 16);
  CHECK(mvm_cycles(0, 64, 4) == 0);
  CHECK(batched_mvm_cycles(64, 10, 64) == 8 + 10 - 1);
  CHECK(batched_mvm_cycles(200, 1, 96) == 3 * 8);
  CHECK(simd_cycles(1024, 128) == 1);
  CHECK(simd_cycles(1025, 128) == 2);
  CHECK(simd_cycles(1000000, 128) == (1000000 + 1023) / 1024);
  CHECK(simd_cycles(0, 128) == 0);
}

TEST_CASE("buffer hits, thrash and write-back") {
  BufferModel b(128, 64);
  CHECK_FALSE(b.read(1, 64).hit);
  CHECK(b.read(1, 64).hit);
  CHECK(b.hits() == 1);
  CHECK(b.misses() == 1);

  BufferModel one(64, 64);
  for (int k = 0; k < 10; ++k) {
    auto a = one.read(static_cast<std::uint64_t>(k % 2), 64);
    CHECK_FALSE(a.hit);
    CHECK(a.dram_read == 64);
  }
  CHECK(one.hit_rate() == 0.0);
  CHECK(one.resident_bytes() <= one.capacity());

  BufferModel d(64, 64);
  CHECK(d.install(7, 10).dram_read == 0);
  auto evict = d.install(8, 64);
  CHECK(evict.dram_write == 64);  // dirty line of key 7 written back
  auto back = d.read(7, 10);
  CHECK(back.dram_read == 64);
  CHECK(d.update(99, 10).dram_read == 0);  // never stored: cold allocation
  d.erase(99);
  CHECK_FALSE(d.contains(99));
}

TEST_CASE("LRU keeps recently used entries") {
  BufferModel b(3 * 64, 64);
  b.read(1, 64);
  b.read(2, 64);
  b.read(3, 64);
  b.read(1, 64);  // 2 is now least recent
  b.read(4, 64);
  CHECK(b.contains(1));
  CHECK_FALSE(b.contains(2));
  CHECK(b.contains(3));
}

TEST_CASE("energy arithmetic") {
  HardwareConfig cfg;
  MetricsReport r;
  CHECK(energy(r, cfg).total() == 0.0);
  r.dram_bytes_read = 1000000000;
  CHECK(energy(r, cfg).dram == doctest::Approx(0.056).epsilon(1e-12));
  r.systolic_busy_cycles = 1000;
  const double one = energy(r, cfg).systolic;
  r.systolic_busy_cycles = 2000;
  CHECK(energy(r, cfg).systolic == doctest::Approx(2 * one).epsilon(1e-15));
  CHECK(one == doctest::Approx(6.7584 / 4 * 1000 / 1e9));
}

TEST_CASE("empty trace costs nothing") {
  Trace t = bare_trace("HAN", 64, 4);
  HardwareConfig cfg;
  MetricsReport r = replay(t, cfg, ReplayMode::kFused);
  CHECK(r.total_cycles == 0);
  CHECK(r.energy.total() == 0.0);
  CHECK(r.dram_bytes() == 0);
}

TEST_CASE("one FP event costs one MVM") {
  Trace t = bare_trace("HAN", 8, 1);
  TraceEvent e;
  e.stage = Stage::kFp;
  e.width = 8;
  t.events.push_back(e);
  HardwareConfig cfg;
  cfg.num_lanes = 1;
  MetricsReport r = replay(t, cfg, ReplayMode::kFused);
  CHECK(r.systolic_busy_cycles == mvm_cycles(8, 8, 96));
  CHECK(r.total_cycles == 24);
  CHECK(r.dram_bytes_read == 8 * 8 * 4 + 64);  // weight plus one raw row line
  CHECK(r.raw_feature_bytes == 64);
  // 64 x 64 weight: the DRAM fetch of 16 KiB outlasts the 24 compute cycles
  Trace big = bare_trace("HAN", 64, 1);
  e.width = 64;
  big.events.push_back(e);
  MetricsReport rb = replay(big, cfg, ReplayMode::kFused);
  CHECK(rb.systolic_busy_cycles == mvm_cycles(64, 64, 96));
  CHECK(rb.total_cycles == (64 * 64 * 4 + 256 + 511) / 512);
}

TEST_CASE("replay rejects mismatched traces") {
  Trace t = bare_trace("HAN", 8, 2);
  HardwareConfig cfg;
  cfg.num_lanes = 4;
  CHECK_THROWS_AS(replay(t, cfg, ReplayMode::kFused), std::invalid_argument);
  Trace open = bare_trace("HAN", 8, 4);
  open.header.graphs.push_back({"G", 0, 0, 3, 1});
  open.events.push_back(TraceEvent{});  // an FP event, but none of the 3 edges
  CHECK_THROWS_AS(replay(open, cfg, ReplayMode::kFused), std::invalid_argument);
  HardwareConfig bad;
  bad.dram_bytes_per_cycle = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("fused never loses to staged and stages overlap (property)") {
  for (ModelKind kind : {ModelKind::kHan, ModelKind::kRgat, ModelKind::kRgcn, ModelKind::kShgn}) {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
      HetGraph g = gen_synthetic(testing::random_spec(seed, 40, 24));
      const auto lanes = 1 + static_cast<std::uint32_t>(seed % 4);
      Run r = simulate(g, kind, lanes, true, 1 + seed % 7);
      INFO(model_name(kind), " seed ", seed);
      CHECK(r.fused_report.total_cycles <= r.staged_report.total_cycles);
      const auto& sc = r.fused_report.stage_cycles;
      CHECK(std::accumulate(sc.begin(), sc.end(), std::uint64_t{0}) >= r.fused_report.total_cycles);
      CHECK(r.fused_report.energy.dram >= 0.0);
      CHECK(r.fused_report.energy.total() ==
            doctest::Approx(r.fused_report.energy.dram + r.fused_report.energy.systolic +
                            r.fused_report.energy.simd + r.fused_report.energy.buffers +
                            r.fused_report.energy.crossbar));
      // replay is a pure function of the trace
      HardwareConfig cfg;
      cfg.num_lanes = lanes;
      CHECK(metrics_to_json(replay(r.fused.trace, cfg, ReplayMode::kFused)) ==
            metrics_to_json(r.fused_report));
    }
  }
}

TEST_CASE("RAB bounds raw feature traffic") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    HetGraph g = gen_synthetic(testing::random_spec(seed, 30, 20));
    for (ModelKind kind : {ModelKind::kHan, ModelKind::kRgcn}) {
      Run on = simulate(g, kind, 2, true);
      Run off = simulate(g, kind, 2, false);
      CHECK(on.fused_report.raw_feature_bytes <= off.fused_report.raw_feature_bytes);
      // each vertex row is read at most once per reuse scope
      auto row = [&](TypeId t) { return (g.vertex_type(t).feature_dim * 4ull + 63) / 64 * 64; };
      auto sgs = select_semantic_graphs(g, kind);
      std::uint64_t bound = 0;
      if (kind == ModelKind::kHan) {
        std::set<TypeId> types;
        for (const SemanticGraph& sg : sgs) types.insert({sg.src_type, sg.dst_type});
        for (TypeId t : types) bound += g.vertex_type(t).count * row(t);
      } else {
        for (const SemanticGraph& sg : sgs) bound += g.vertex_type(sg.src_type).count * row(sg.src_type);
        for (TypeId t : target_types(sgs)) bound += g.vertex_type(t).count * row(t);  // self term
      }
      CHECK(on.fused_report.raw_feature_bytes <= bound);
    }
  }
  // average degree above one: strictly fewer raw bytes with RAB
  HetGraph dense = gen_synthetic(dataset_preset("dblp", 0.02, 3));
  Run on = simulate(dense, ModelKind::kHan, 4, true);
  Run off = simulate(dense, ModelKind::kHan, 4, false);
  CHECK(on.fused_report.raw_feature_bytes < off.fused_report.raw_feature_bytes);
  CHECK(on.fused_report.total_cycles < off.fused_report.total_cycles);
}

TEST_CASE("more lanes do not slow a balanced workload") {
  HetGraph g = gen_synthetic(dataset_preset("dblp", 0.05, 1));
  std::uint64_t prev = UINT64_MAX;
  for (std::uint32_t lanes : {1u, 2u, 4u, 8u}) {
    Run r = simulate(g, ModelKind::kHan, lanes, true, 256, 64);
    CHECK(r.fused_report.total_cycles <= prev);
    prev = r.fused_report.total_cycles;
  }
}

TEST_CASE("metrics serialization") {
  HetGraph g = gen_synthetic(testing::random_spec(3, 20));
  Run r = simulate(g, ModelKind::kHan, 2);
  auto j = nlohmann::json::parse(metrics_to_json(r.fused_report));
  CHECK(j["schema_version"] == MetricsReport::kSchemaVersion);
  CHECK(j["mode"] == "fused");
  CHECK(j["total_cycles"] == r.fused_report.total_cycles);
  CHECK(j["stage_cycles"].size() == kNumStageGroups);
  CHECK(j["buffers"].contains("FP-Buf"));
  CHECK(j["energy_j"]["total"].get<double>() == doctest::Approx(r.fused_report.energy.total()));
  const std::string header = metrics_csv_header();
  const std::string row = metrics_to_csv_row(r.fused_report);
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(row.rfind("fused,HAN,2,", 0) == 0);
}

}
