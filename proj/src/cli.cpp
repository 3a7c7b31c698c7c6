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

#include "hihgnn/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "hihgnn/common.hpp"
#include "hihgnn/experiment.hpp"
#include "hihgnn/graph_io.hpp"
#include "json.hpp"

namespace hihgnn {

namespace {

constexpr double kCompareTolerance = 1e-9;

bool parse_switch(const std::string& name, const std::string& v) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw std::invalid_argument("--" + name + " takes on or off, got '" + v + "'");
}

struct Overrides {
  std::optional<std::string> model, fusion, balance, rab, schedule, out;
  std::optional<std::uint32_t> lanes;
  std::optional<std::uint64_t> threshold, seed;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "HAN, R-GAT, R-GCN or S-HGN");
    app->add_option("--lanes", lanes, "number of lanes");
    app->add_option("--threshold", threshold, "edges per lane per round");
    app->add_option("--fusion", fusion, "on: fused replay, off: staged replay");
    app->add_option("--balance", balance, "on|off workload balancing across lanes");
    app->add_option("--rab", rab, "on|off projection / attention reuse");
    app->add_option("--schedule", schedule, "similarity, random:<seed> or given:<file>");
    app->add_option("--seed", seed, "override the config seed");
    app->add_option("--out", out, "output directory");
  }

  void apply(ExperimentConfig& c) const {
    if (model) c.model = parse_model_kind(*model);
    if (lanes) c.num_lanes = *lanes;
    if (threshold) c.threshold = *threshold;
    if (fusion) c.fusion = parse_switch("fusion", *fusion);
    if (balance) c.balance = parse_switch("balance", *balance);
    if (rab) c.rab = parse_switch("rab", *rab);
    if (schedule) c.schedule = ScheduleSpec::parse(*schedule);
    if (seed) c.seed = *seed;
    if (out) c.output_dir = *out;
    validate_config(c);
  }
};

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneous GNN accelerator simulator", "hihgnn-sim"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic heterogeneous graph file");
  std::string gen_preset, gen_spec, gen_output;
  double gen_scale = 1.0;
  std::uint32_t ring_graphs = 0, ring_vertices = 1000, ring_dim = 64;
  double ring_degree = 4.0;
  std::uint64_t gen_seed = 0;
  bool gen_features = false;
  auto* o_preset = gen->add_option("--preset", gen_preset, "imdb, acm or dblp");
  gen->add_option("--scale", gen_scale, "preset scale in (0, 1]")->needs(o_preset);
  auto* o_ring = gen->add_option("--ring", ring_graphs, "ring of N types and relations");
  gen->add_option("--vertices", ring_vertices, "ring: vertices per type")->needs(o_ring);
  gen->add_option("--feature-dim", ring_dim, "ring: feature width")->needs(o_ring);
  gen->add_option("--avg-degree", ring_degree, "ring: average in-degree")->needs(o_ring);
  auto* o_spec = gen->add_option("--spec", gen_spec, "JSON synthetic spec (types, relations, metapaths)");
  o_preset->excludes(o_ring)->excludes(o_spec);
  o_ring->excludes(o_spec);
  gen->add_option("--seed", gen_seed, "generator seed")->required();
  gen->add_option("-o,--output", gen_output, "graph file to write")->required();
  gen->add_flag("--features", gen_features, "write raw features (otherwise they are regenerated from the seed)");

  // run / compare / schedule / sweep share a config plus overrides
  std::string config_path;
  Overrides ov;
  auto* run = app.add_subcommand("run", "run the fused engine and the performance model");
  run->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  ov.attach(run);

  auto* compare = app.add_subcommand("compare", "compare fused-engine embeddings against the oracle");
  compare->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  ov.attach(compare);

  auto* schedule = app.add_subcommand("schedule", "print the execution order only");
  std::string schedule_out;
  schedule->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  schedule->add_option("-o,--output", schedule_out, "write here instead of stdout");
  ov.attach(schedule);

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write a CSV");
  std::string axis, values_text, sweep_out;
  std::uint32_t randoms = 10;
  unsigned jobs = 1;
  sweep->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis, "lanes, schedules or graph-count")->required();
  auto* o_values = sweep->add_option("--values", values_text, "comma-separated axis values");
  sweep->add_option("--randoms", randoms, "random orders per point (schedule axes)");
  sweep->add_option("--jobs", jobs, "parallel points (capped by HIHGNN_SIM_THREADS)");
  sweep->add_option("-o,--output", sweep_out, "CSV path (default <output_dir>/sweep-<axis>.csv)");
  ov.attach(sweep);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      HetGraph g = [&] {
        if (!gen_preset.empty()) return gen_synthetic(dataset_preset(gen_preset, gen_scale, gen_seed));
        if (ring_graphs > 0) {
          return gen_synthetic(ring_preset(ring_graphs, ring_vertices, ring_dim, ring_degree, gen_seed));
        }
        if (!gen_spec.empty()) {
          std::ifstream in(gen_spec);
          if (!in) throw std::runtime_error("cannot open '" + gen_spec + "'");
          std::stringstream ss;
          ss << in.rdbuf();
          nlohmann::json j{{"seed", gen_seed}, {"dataset", {{"synthetic", nlohmann::json::parse(ss.str())}}}};
          return build_dataset(parse_config(j.dump()).dataset, gen_seed);
        }
        throw std::invalid_argument("gen needs --preset, --ring or --spec");
      }();
      if (!gen_features) {
        std::vector<Matrix> none(g.vertex_types().size());
        std::vector<CscMatrix> adj;
        for (RelationId r = 0; r < g.relations().size(); ++r) adj.push_back(g.adjacency(r));
        g = HetGraph({g.vertex_types().begin(), g.vertex_types().end()},
                     {g.relations().begin(), g.relations().end()}, std::move(adj), std::move(none),
                     {g.metapaths().begin(), g.metapaths().end()});
      }
      save_hetgraph(g, gen_output);
      out << "wrote " << gen_output << '\n';
      return 0;
    }

    ExperimentConfig cfg = load_config(config_path);
    ov.apply(cfg);

    if (run->parsed()) {
      const PreparedRun prep = prepare_run(cfg);
      const RunOutcome result = execute_run(cfg, prep);
      write_run_outputs(cfg, prep, result, "run");
      out << result.metrics.mode << " cycles " << result.metrics.total_cycles << ", DRAM bytes "
          << result.metrics.dram_bytes() << ", outputs in " << cfg.output_dir << '\n';
      return 0;
    }
    if (compare->parsed()) {
      const PreparedRun prep = prepare_run(cfg);
      const CompareOutcome c = compare_run(cfg, prep);
      out << "max_relative_error " << format_double(c.max_error) << " (" << c.compared << ")\n";
      return c.max_error <= kCompareTolerance ? 0 : 1;
    }
    if (schedule->parsed()) {
      const PreparedRun prep = prepare_run(cfg);
      const std::string text = schedule_json(cfg, prep.order);
      if (schedule_out.empty()) {
        out << text;
      } else {
        write_text(schedule_out, text);
      }
      return 0;
    }
    if (sweep->parsed()) {
      SweepOptions opt;
      opt.axis = parse_sweep_axis(axis);
      opt.random_orders = randoms;
      opt.jobs = jobs;
      opt.values = o_values->count() > 0 ? split_list(values_text) : default_sweep_values(opt.axis, randoms);
      const std::string csv = run_sweep(cfg, opt);
      const std::string path =
          sweep_out.empty() ? (std::filesystem::path(cfg.output_dir) / ("sweep-" + axis + ".csv")).string()
                            : sweep_out;
      write_text(path, csv);
      out << csv;
      return 0;
    }
  } catch (const std::exception& e) {
    err << "hihgnn-sim: error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace hihgnn
