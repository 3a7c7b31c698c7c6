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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hihgnn/cli.hpp"
#include "hihgnn/fusion.hpp"
#include "hihgnn/perf.hpp"
#include "hihgnn/scheduler.hpp"
#include "hihgnn/synthetic.hpp"
#include "test_support.hpp"

using namespace hihgnn;
namespace fs = std::filesystem;

namespace {

constexpr ModelKind kModels[] = {ModelKind::kHan, ModelKind::kRgat, ModelKind::kRgcn, ModelKind::kShgn};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Verdict& v) {
  std::printf("criterion %d %-28s %s  %s\n", id, name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// Shared between criteria 1, 3 and 5: one fused run per (graph, model).
struct CaseRun {
  std::string graph;
  ModelKind kind;
  double max_error = 0.0;
  double seconds = 0.0;
  FusionStats stats;
  Trace trace;
};

std::vector<HetGraph> synthetic_suite() {
  std::vector<HetGraph> out;
  for (std::uint64_t seed = 1; out.size() < 5; ++seed) {
    HetGraph g = gen_synthetic(testing::random_spec(seed, 400, 48));
    if (g.total_edges() <= 50000 && g.total_edges() >= 5000) out.push_back(std::move(g));
  }
  return out;
}

CaseRun run_case(const std::string& name, const HetGraph& g, ModelKind kind, std::uint64_t seed) {
  CaseRun c;
  c.graph = name;
  c.kind = kind;
  const auto t0 = Clock::now();
  auto sgs = select_semantic_graphs(g, kind);
  ModelParams p = generate_params(kind, g, sgs, seed);
  const ExecutionOrder order = shortest_hamilton_path(build_hypergraph(sgs));
  FusionOptions opt;
  opt.num_lanes = 4;
  FusionResult r = run_fused(g, sgs, p, order.indices, opt);
  const EmbeddingResult oracle = run_oracle(g, sgs, p);
  c.max_error = compare_embeddings(r.embeddings, oracle);
  c.seconds = seconds_since(t0);
  c.stats = r.stats;
  c.trace = std::move(r.trace);
  return c;
}

Verdict criterion_1(const std::vector<CaseRun>& runs) {
  Verdict v;
  double worst = 0.0, slowest = 0.0;
  for (const CaseRun& c : runs) {
    worst = std::max(worst, c.max_error);
    slowest = std::max(slowest, c.seconds);
    if (!(c.max_error <= 1e-9) || c.seconds > 60.0) {
      v.pass = false;
      v.detail += c.graph + "/" + std::string(model_name(c.kind)) + " error " + fmt("%.3g", c.max_error) +
                  " in " + fmt("%.1f", c.seconds) + " s; ";
    }
  }
  v.detail += std::to_string(runs.size()) + " cases, max error " + fmt("%.3g", worst) + ", slowest " +
              fmt("%.1f", slowest) + " s";
  return v;
}

Verdict criterion_2() {
  const auto t0 = Clock::now();
  Verdict v;
  int mismatches = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.below(8);
    std::vector<std::string> ids;
    std::vector<std::vector<std::uint32_t>> types;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back("g" + std::to_string(i));
      std::vector<std::uint32_t> t;
      for (std::uint32_t k = 0; k < 6; ++k) {
        if (rng.below(3) == 0) t.push_back(k);
      }
      types.push_back(t);
    }
    const SimilarityHypergraph h = build_hypergraph(ids, types);
    const ExecutionOrder o = shortest_hamilton_path(h);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::uint64_t best = UINT64_MAX;
    do {
      best = std::min(best, path_cost_units(h, perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (o.cost_units != best) ++mismatches;
  }
  // A=0, P=1, T=2, V=3 by endpoint type
  const SimilarityHypergraph ex =
      build_hypergraph({"AP", "PT", "PP", "APA", "AVA"}, {{0, 1}, {1, 2}, {1}, {0}, {0}});
  const ExecutionOrder o = shortest_hamilton_path(ex);
  const std::vector<std::size_t> reference{3, 4, 0, 2, 1};  // APA-AVA-AP-PP-PT
  const std::uint64_t ref_cost = path_cost_units(ex, reference);
  std::string order;
  for (const std::string& id : o.ids) order += (order.empty() ? "" : "-") + id;
  const double secs = seconds_since(t0);
  v.pass = mismatches == 0 && o.cost_units == ref_cost && secs <= 10.0;
  v.detail = std::to_string(mismatches) + "/100 mismatches; example order " + order + " cost " +
             std::to_string(o.cost_units) + "/" + std::to_string(ex.denominator) + " vs reference " +
             std::to_string(ref_cost) + "/" + std::to_string(ex.denominator) + "; " + fmt("%.2f", secs) + " s";
  return v;
}

Verdict criterion_3(const std::vector<CaseRun>& runs) {
  Verdict v;
  std::uint64_t fp = 0, theta = 0, bad = 0, max_fp = 0, max_theta = 0;
  for (const CaseRun& c : runs) {
    fp += c.stats.fp_violations;
    theta += c.stats.theta_violations;
    bad += c.stats.invalid_rab_codes;
    max_fp = std::max(max_fp, c.stats.max_fp_per_vertex_scope);
    max_theta = std::max(max_theta, c.stats.max_theta_per_vertex_graph);
  }
  v.pass = fp == 0 && theta == 0 && bad == 0 && max_fp == 1 && max_theta <= 2;
  v.detail = "FP per vertex and scope max " + std::to_string(max_fp) + ", theta per vertex and graph max " +
             std::to_string(max_theta) + ", violations " + std::to_string(fp + theta + bad);
  return v;
}

Verdict criterion_4() {
  Verdict v;
  std::uint64_t violations = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const auto lanes = 1 + static_cast<std::uint32_t>(rng.below(8));
    const auto threshold = 1 + rng.below(64);
    std::vector<std::uint64_t> sizes(1 + rng.below(16));
    for (auto& s : sizes) s = rng.below(500);
    const LanePlan p = balance_workloads(sizes, lanes, threshold, true);
    std::vector<std::uint64_t> consumed(sizes.size(), 0);
    for (const RoundPlan& r : p.rounds) {
      for (std::uint64_t load : r.lane_load) violations += load > threshold;
      for (const LaneAssignment& a : r.assignments) consumed[a.list] += a.count;
    }
    violations += consumed != sizes;
  }
  const std::vector<std::uint64_t> loads{7043571, 5000496, 11113};
  const auto totals = balance_workloads(loads, 4, 256, true).lane_totals();
  const std::uint64_t sum = std::accumulate(loads.begin(), loads.end(), std::uint64_t{0});
  const std::uint64_t ideal = (sum + 3) / 4;
  const std::uint64_t worst = *std::max_element(totals.begin(), totals.end());
  v.pass = violations == 0 && double(worst) <= 1.01 * double(ideal);
  v.detail = std::to_string(violations) + " fuzz violations; max lane " + std::to_string(worst) + " vs ceil(sum/4) " +
             std::to_string(ideal) + " (ratio " + fmt("%.5f", double(worst) / double(ideal)) + ")";
  return v;
}

Verdict criterion_5(const std::vector<CaseRun>& dblp) {
  Verdict v;
  HardwareConfig hw;
  hw.num_lanes = 4;
  double log_sum = 0.0;
  bool all_faster = true;
  for (const CaseRun& c : dblp) {
    const MetricsReport f = replay(c.trace, hw, ReplayMode::kFused);
    const MetricsReport s = replay(c.trace, hw, ReplayMode::kStaged);
    all_faster = all_faster && f.total_cycles < s.total_cycles;
    const double ratio = double(f.total_cycles) / double(s.total_cycles);
    log_sum += std::log(ratio);
    v.detail += std::string(model_name(c.kind)) + " " + fmt("%.1f%%", 100.0 * (1.0 - ratio)) + ", ";
  }
  const double gm = 1.0 - std::exp(log_sum / double(dblp.size()));
  v.pass = all_faster && gm >= 0.20 && gm <= 0.50;
  v.detail += "geometric-mean reduction " + fmt("%.1f%%", 100.0 * gm) + " (band 20-50%), fused < staged in every case: " +
              (all_faster ? "yes" : "no");
  return v;
}

Verdict criterion_6(const HetGraph& dblp) {
  Verdict v;
  auto sgs = select_semantic_graphs(dblp, ModelKind::kHan);
  ModelParams p = generate_params(ModelKind::kHan, dblp, sgs, 3);
  const ExecutionOrder order = shortest_hamilton_path(build_hypergraph(sgs));
  std::vector<std::uint64_t> cycles;
  for (std::uint32_t lanes : {1u, 2u, 4u, 8u}) {
    FusionOptions opt;
    opt.num_lanes = lanes;
    opt.record_trace = true;
    const FusionResult r = run_fused(dblp, sgs, p, order.indices, opt);
    HardwareConfig hw;
    hw.num_lanes = lanes;
    cycles.push_back(replay(r.trace, hw, ReplayMode::kFused).total_cycles);
    v.detail += std::to_string(lanes) + " lanes " + std::to_string(cycles.back()) + ", ";
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < cycles.size(); ++i) decreasing = decreasing && cycles[i] < cycles[i - 1];
  const double eff = double(cycles[0]) / (4.0 * double(cycles[2]));
  v.pass = decreasing && eff >= 0.6;
  v.detail += "4-lane efficiency " + fmt("%.3f", eff);
  return v;
}

Verdict criterion_7() {
  Verdict v;
  constexpr std::uint32_t kVertices = 6000, kDim = 64, kLanes = 4;
  double prev = -INFINITY;
  bool ok = true;
  for (std::uint32_t n : {4u, 8u, 12u}) {
    HetGraph g = gen_synthetic(ring_preset(n, kVertices, kDim, 4.0, 7));
    auto sgs = select_semantic_graphs(g, ModelKind::kHan);
    ModelParams p = generate_params(ModelKind::kHan, g, sgs, 3);
    const SimilarityHypergraph h = build_hypergraph(sgs);
    HardwareConfig hw;
    hw.num_lanes = kLanes;
    FusionOptions opt;
    opt.num_lanes = kLanes;
    auto dram = [&](const ExecutionOrder& o) {
      const FusionResult r = run_fused(g, sgs, p, o.indices, opt);
      return double(replay(r.trace, hw, ReplayMode::kFused).dram_bytes());
    };
    const std::uint64_t projected = std::uint64_t(n) * kVertices * p.hidden_dim * hw.element_bytes;
    const double sim = dram(shortest_hamilton_path(h));
    double mean = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) mean += dram(random_order(h, 100 + s));
    mean /= 10.0;
    const double adv = 1.0 - sim / mean;
    const bool big = projected >= 2 * hw.fp_buf_bytes;
    ok = ok && big && sim <= mean && adv >= prev;
    prev = adv;
    v.detail += std::to_string(n) + " graphs: advantage " + fmt("%.4f", adv) + " (projected " +
                fmt("%.1f", double(projected) / double(hw.fp_buf_bytes)) + "x FP-Buf); ";
  }
  v.pass = ok;
  return v;
}

Verdict criterion_8() {
  Verdict v;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.below(32), d = 1 + rng.below(16);
    std::vector<double> logits(n);
    for (double& x : logits) x = rng.uniform(-60, 60);
    Matrix rows(n, d);
    for (double& x : rows.values()) x = rng.uniform(-4, 4);
    const auto a = decomposed_softmax_aggregate(logits, rows);
    const auto b = direct_softmax_aggregate(logits, rows);
    worst = std::max(worst, max_relative_error(a, b, 1e-12));
  }
  v.pass = worst <= 1e-12;
  v.detail = "10000 cases, max relative error " + fmt("%.3g", worst);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "hihgnn-sim");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  return code;
}

Verdict criterion_9() {
  Verdict v;
  const fs::path root = fs::temp_directory_path() / "hihgnn-acceptance";
  fs::remove_all(root);
  std::map<std::string, std::string> first;
  int bad_exit = 0, differ = 0, files = 0;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = root / ("pass" + std::to_string(pass));
    fs::create_directories(dir);
    std::map<std::string, std::string> got;
    const std::string graph = (dir / "g.hg").string();
    bad_exit += cli({"gen", "--preset", "dblp", "--scale", "0.05", "--seed", "11", "-o", graph}) != 0;
    got["g.hg"] = slurp(graph);
    for (const char* model : {"HAN", "R-GAT", "R-GCN", "S-HGN"}) {
      const fs::path cfg = dir / (std::string(model) + ".json");
      std::ofstream(cfg) << R"({"dataset": {"path": "g.hg"}, "model": ")" << model
                         << R"(", "seed": 11, "num_lanes": 4, "output_dir": "out-)" << model << "\"}";
      bad_exit += cli({"run", cfg.string()}) != 0;
      for (const char* f : {"metrics.json", "metrics.csv", "embeddings.csv", "schedule.json"}) {
        got[std::string(model) + "/" + f] = slurp(dir / ("out-" + std::string(model)) / f);
      }
      std::string text;
      bad_exit += cli({"compare", cfg.string()}, &text) != 0;
      got[std::string(model) + "/compare"] = text;
      bad_exit += cli({"schedule", cfg.string()}, &text) != 0;
      got[std::string(model) + "/schedule"] = text;
    }
    bad_exit += cli({"sweep", (dir / "HAN.json").string(), "--axis", "lanes", "--jobs", "2"}) != 0;
    got["sweep-lanes.csv"] = slurp(dir / "out-HAN" / "sweep-lanes.csv");
    bad_exit += cli({"sweep", (dir / "R-GAT.json").string(), "--axis", "schedules", "--randoms", "3"}) != 0;
    got["sweep-schedules.csv"] = slurp(dir / "out-R-GAT" / "sweep-schedules.csv");
    if (pass == 0) {
      first = got;
    } else {
      for (auto& [name, text] : got) {
        ++files;
        if (text.empty() || first[name] != text) {
          ++differ;
          v.detail += name + " differs; ";
        }
      }
    }
  }
  fs::remove_all(root);
  v.pass = bad_exit == 0 && differ == 0;
  v.detail += std::to_string(files) + " outputs compared, " + std::to_string(differ) + " differ, " +
              std::to_string(bad_exit) + " nonzero exits";
  return v;
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  std::vector<CaseRun> runs;
  std::vector<CaseRun> dblp_runs;
  {
    const auto suite = synthetic_suite();
    for (std::size_t i = 0; i < suite.size(); ++i) {
      for (ModelKind kind : kModels) {
        runs.push_back(run_case("synthetic" + std::to_string(i + 1), suite[i], kind, 3));
        runs.back().trace = Trace{};
      }
    }
  }
  const HetGraph dblp = gen_synthetic(dataset_preset("dblp", 1.0, 1));
  for (ModelKind kind : kModels) {
    dblp_runs.push_back(run_case("dblp", dblp, kind, 3));
  }
  runs.insert(runs.end(), dblp_runs.begin(), dblp_runs.end());
  for (CaseRun& c : runs) c.trace = Trace{};

  report(1, "oracle equivalence", criterion_1(runs));
  report(2, "hamilton scheduling", criterion_2());
  report(3, "RAB deduplication", criterion_3(runs));
  report(4, "workload balance", criterion_4());
  report(5, "stage-fusion trend", criterion_5(dblp_runs));
  dblp_runs.clear();
  report(6, "lane scale-up trend", criterion_6(dblp));
  report(7, "similarity scheduling trend", criterion_7());
  report(8, "softmax decomposition", criterion_8());
  report(9, "CLI determinism", criterion_9());
  std::printf("%d of 9 criteria failed, %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
