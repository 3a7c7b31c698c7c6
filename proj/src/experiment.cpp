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

#include "hihgnn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "hihgnn/common.hpp"
#include "hihgnn/graph_io.hpp"
#include "json.hpp"

namespace hihgnn {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
T get_uint(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned()) throw std::invalid_argument(where + "." + key + " must be a non-negative integer");
  const auto x = v.get<std::uint64_t>();
  if (x > std::numeric_limits<T>::max()) throw std::invalid_argument(where + "." + key + " is too large");
  return static_cast<T>(x);
}

double get_number(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number()) throw std::invalid_argument(where + "." + key + " must be a number");
  return v.get<double>();
}

bool get_bool(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_boolean()) throw std::invalid_argument(std::string(key) + " must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_string()) throw std::invalid_argument(where + "." + key + " must be a string");
  return v.get<std::string>();
}

SyntheticSpec parse_synthetic(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("dataset.synthetic must be an object");
  check_keys(j, {"types", "relations", "metapaths"}, "dataset.synthetic");
  SyntheticSpec s;
  for (const json& t : j.at("types")) {
    check_keys(t, {"name", "count", "feature_dim"}, "a synthetic type");
    s.types.push_back({get_string(t, "name", "type"), get_uint<std::uint32_t>(t, "count", "type"),
                       t.contains("feature_dim") ? get_uint<std::uint32_t>(t, "feature_dim", "type") : 0});
  }
  for (const json& r : j.at("relations")) {
    check_keys(r, {"name", "src", "dst", "density", "edges", "reverse_of"}, "a synthetic relation");
    SyntheticRelation sr;
    sr.name = get_string(r, "name", "relation");
    sr.src = get_string(r, "src", "relation");
    sr.dst = get_string(r, "dst", "relation");
    if (r.contains("density")) sr.density = get_number(r, "density", "relation");
    if (r.contains("edges")) sr.edges = get_uint<std::uint64_t>(r, "edges", "relation");
    if (r.contains("reverse_of")) sr.reverse_of = get_string(r, "reverse_of", "relation");
    s.relations.push_back(std::move(sr));
  }
  if (j.contains("metapaths")) {
    for (const json& m : j.at("metapaths")) {
      check_keys(m, {"name", "relations"}, "a synthetic metapath");
      s.metapaths.push_back({get_string(m, "name", "metapath"), m.at("relations").get<std::vector<std::string>>()});
    }
  }
  return s;
}

ojson synthetic_to_json(const SyntheticSpec& s) {
  ojson types = ojson::array(), rels = ojson::array(), mps = ojson::array();
  for (const VertexType& t : s.types) {
    types.push_back({{"name", t.name}, {"count", t.count}, {"feature_dim", t.feature_dim}});
  }
  for (const SyntheticRelation& r : s.relations) {
    ojson jr{{"name", r.name}, {"src", r.src}, {"dst", r.dst}};
    if (r.density) jr["density"] = *r.density;
    if (r.edges) jr["edges"] = *r.edges;
    if (r.reverse_of) jr["reverse_of"] = *r.reverse_of;
    rels.push_back(std::move(jr));
  }
  for (const SyntheticMetapath& m : s.metapaths) mps.push_back({{"name", m.name}, {"relations", m.relations}});
  return {{"types", types}, {"relations", rels}, {"metapaths", mps}};
}

struct HwField {
  const char* name;
  std::function<void(HardwareConfig&, double)> set;
  std::function<double(const HardwareConfig&)> get;
  bool integral;
};

template <typename T>
HwField field(const char* name, T HardwareConfig::*member) {
  return {name,
          [member, name](HardwareConfig& hw, double v) {
            if constexpr (std::is_integral_v<T>) {
              if (v < 0 || v != std::floor(v) || v > double(std::numeric_limits<T>::max())) {
                throw std::invalid_argument(std::string("hardware.") + name + " must be a non-negative integer");
              }
            }
            hw.*member = static_cast<T>(v);
          },
          [member](const HardwareConfig& hw) { return static_cast<double>(hw.*member); }, std::is_integral_v<T>};
}

const std::vector<HwField>& hw_fields() {
  static const std::vector<HwField> fields = {
      field("clock_hz", &HardwareConfig::clock_hz),
      field("systolic_arrays_per_lane", &HardwareConfig::systolic_arrays_per_lane),
      field("systolic_dim", &HardwareConfig::systolic_dim),
      field("systolic_fill_cycles", &HardwareConfig::systolic_fill_cycles),
      field("simd_cores_per_lane", &HardwareConfig::simd_cores_per_lane),
      field("simd_width", &HardwareConfig::simd_width),
      field("fp_buf_bytes", &HardwareConfig::fp_buf_bytes),
      field("na_buf_bytes", &HardwareConfig::na_buf_bytes),
      field("sf_buf_bytes", &HardwareConfig::sf_buf_bytes),
      field("att_buf_bytes", &HardwareConfig::att_buf_bytes),
      field("dram_bytes_per_cycle", &HardwareConfig::dram_bytes_per_cycle),
      field("dram_energy_per_bit", &HardwareConfig::dram_energy_per_bit),
      field("dram_line_bytes", &HardwareConfig::dram_line_bytes),
      field("crossbar_bytes_per_cycle", &HardwareConfig::crossbar_bytes_per_cycle),
      field("element_bytes", &HardwareConfig::element_bytes),
      field("power_reference_lanes", &HardwareConfig::power_reference_lanes),
      field("systolic_power_w", &HardwareConfig::systolic_power_w),
      field("simd_power_w", &HardwareConfig::simd_power_w),
      field("fp_buf_power_w", &HardwareConfig::fp_buf_power_w),
      field("na_buf_power_w", &HardwareConfig::na_buf_power_w),
      field("sf_buf_power_w", &HardwareConfig::sf_buf_power_w),
      field("att_buf_power_w", &HardwareConfig::att_buf_power_w),
      field("crossbar_power_w", &HardwareConfig::crossbar_power_w),
  };
  return fields;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

// ---- schedule spec -------------------------------------------------------

ScheduleSpec ScheduleSpec::parse(const std::string& text) {
  ScheduleSpec s;
  if (text == "similarity") return s;
  if (text.rfind("random:", 0) == 0) {
    s.kind = Kind::kRandom;
    s.seed = parse_u64(std::string_view(text).substr(7));
    return s;
  }
  if (text.rfind("given:", 0) == 0 && text.size() > 6) {
    s.kind = Kind::kGiven;
    s.path = text.substr(6);
    return s;
  }
  throw std::invalid_argument("schedule must be similarity, random:<seed> or given:<file>, got '" + text + "'");
}

std::string ScheduleSpec::to_string() const {
  switch (kind) {
    case Kind::kSimilarity: return "similarity";
    case Kind::kRandom: return "random:" + std::to_string(seed);
    case Kind::kGiven: return "given:" + path;
  }
  return "similarity";
}

// ---- config --------------------------------------------------------------

void set_hardware_field(HardwareConfig& hw, const std::string& name, double value) {
  if (name == "num_lanes") throw std::invalid_argument("set num_lanes at the top level of the config");
  if (name == "na_queue_capacity") throw std::invalid_argument("set the lane threshold with 'threshold'");
  for (const HwField& f : hw_fields()) {
    if (name == f.name) {
      f.set(hw, value);
      return;
    }
  }
  throw std::invalid_argument("unknown hardware field '" + name + "'");
}

std::string hardware_to_json(const HardwareConfig& hw) {
  ojson j;
  j["num_lanes"] = hw.num_lanes;
  for (const HwField& f : hw_fields()) {
    if (f.integral) {
      j[f.name] = static_cast<std::uint64_t>(f.get(hw));
    } else {
      j[f.name] = f.get(hw);
    }
  }
  j["na_queue_capacity"] = hw.na_queue_capacity;
  return j.dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  check_keys(j,
             {"dataset", "model", "seed", "hidden_dim", "num_layers", "num_lanes", "threshold", "fusion",
              "balance", "rab", "schedule", "params", "hardware", "output_dir"},
             "config");
  ExperimentConfig c;
  try {
    if (!j.contains("seed")) throw std::invalid_argument("config needs a 'seed'");
    c.seed = get_uint<std::uint64_t>(j, "seed", "config");
    if (!j.contains("dataset")) throw std::invalid_argument("config needs a 'dataset'");
    const json& d = j.at("dataset");
    if (!d.is_object()) throw std::invalid_argument("dataset must be an object");
    check_keys(d, {"path", "preset", "scale", "ring", "synthetic"}, "dataset");
    const int kinds = int(d.contains("path")) + int(d.contains("preset")) + int(d.contains("ring")) +
                      int(d.contains("synthetic"));
    if (kinds != 1) throw std::invalid_argument("dataset needs exactly one of path, preset, ring, synthetic");
    if (d.contains("scale") && !d.contains("preset")) throw std::invalid_argument("dataset.scale needs a preset");
    if (d.contains("path")) {
      c.dataset.kind = DatasetSpec::Kind::kPath;
      c.dataset.path = resolve(base_dir, get_string(d, "path", "dataset"));
    } else if (d.contains("preset")) {
      c.dataset.kind = DatasetSpec::Kind::kPreset;
      c.dataset.preset = get_string(d, "preset", "dataset");
      if (d.contains("scale")) c.dataset.scale = get_number(d, "scale", "dataset");
    } else if (d.contains("ring")) {
      c.dataset.kind = DatasetSpec::Kind::kRing;
      const json& r = d.at("ring");
      check_keys(r, {"graphs", "vertices_per_type", "feature_dim", "avg_degree"}, "dataset.ring");
      if (r.contains("graphs")) c.dataset.ring.graphs = get_uint<std::uint32_t>(r, "graphs", "ring");
      if (r.contains("vertices_per_type")) {
        c.dataset.ring.vertices_per_type = get_uint<std::uint32_t>(r, "vertices_per_type", "ring");
      }
      if (r.contains("feature_dim")) c.dataset.ring.feature_dim = get_uint<std::uint32_t>(r, "feature_dim", "ring");
      if (r.contains("avg_degree")) c.dataset.ring.avg_degree = get_number(r, "avg_degree", "ring");
    } else {
      c.dataset.kind = DatasetSpec::Kind::kSynthetic;
      c.dataset.synthetic = parse_synthetic(d.at("synthetic"));
    }
    if (j.contains("model")) c.model = parse_model_kind(get_string(j, "model", "config"));
    if (j.contains("hidden_dim")) c.hidden_dim = get_uint<std::uint32_t>(j, "hidden_dim", "config");
    if (j.contains("num_layers")) c.num_layers = get_uint<std::uint32_t>(j, "num_layers", "config");
    if (j.contains("num_lanes")) c.num_lanes = get_uint<std::uint32_t>(j, "num_lanes", "config");
    if (j.contains("fusion")) c.fusion = get_bool(j, "fusion");
    if (j.contains("balance")) c.balance = get_bool(j, "balance");
    if (j.contains("rab")) c.rab = get_bool(j, "rab");
    if (j.contains("schedule")) {
      c.schedule = ScheduleSpec::parse(get_string(j, "schedule", "config"));
      if (c.schedule.kind == ScheduleSpec::Kind::kGiven) c.schedule.path = resolve(base_dir, c.schedule.path);
    }
    if (j.contains("params")) c.params_path = resolve(base_dir, get_string(j, "params", "config"));
    if (j.contains("hardware")) {
      const json& h = j.at("hardware");
      if (!h.is_object()) throw std::invalid_argument("hardware must be an object");
      for (auto it = h.begin(); it != h.end(); ++it) {
        // The resolved config echoes these two; accept them when they agree.
        if (it.key() == "num_lanes" && *it == j.value("num_lanes", json(c.num_lanes))) continue;
        if (it.key() == "na_queue_capacity" && j.contains("threshold") && *it == j.at("threshold")) continue;
        if (!it->is_number()) throw std::invalid_argument("hardware." + it.key() + " must be a number");
        set_hardware_field(c.hardware, it.key(), it->get<double>());
      }
    }
    if (j.contains("threshold")) c.threshold = get_uint<std::uint64_t>(j, "threshold", "config");
    if (j.contains("output_dir")) c.output_dir = resolve(base_dir, get_string(j, "output_dir", "config"));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config: ") + e.what());
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_file(path), fs::path(path).parent_path().string().empty()
                                           ? "."
                                           : fs::path(path).parent_path().string());
}

void validate_config(const ExperimentConfig& c) {
  if (c.num_lanes == 0) throw std::invalid_argument("num_lanes must be at least 1");
  if (c.num_lanes > 255) throw std::invalid_argument("num_lanes must be at most 255");
  if (c.threshold == 0) throw std::invalid_argument("threshold must be at least 1");
  if (c.hidden_dim == 0) throw std::invalid_argument("hidden_dim must be at least 1");
  if (c.dataset.kind == DatasetSpec::Kind::kPath && !fs::exists(c.dataset.path)) {
    throw std::invalid_argument("dataset file '" + c.dataset.path + "' does not exist");
  }
  if (c.dataset.kind == DatasetSpec::Kind::kPreset && !(c.dataset.scale > 0.0 && c.dataset.scale <= 1.0)) {
    throw std::invalid_argument("dataset.scale must be in (0, 1]");
  }
  if (c.schedule.kind == ScheduleSpec::Kind::kGiven && !fs::exists(c.schedule.path)) {
    throw std::invalid_argument("schedule file '" + c.schedule.path + "' does not exist");
  }
  if (!c.params_path.empty() && !fs::exists(c.params_path)) {
    throw std::invalid_argument("params file '" + c.params_path + "' does not exist");
  }
  HardwareConfig hw = c.hardware;
  hw.num_lanes = c.num_lanes;
  hw.na_queue_capacity = c.threshold;
  hw.validate(c.hidden_dim);
}

std::string config_to_json(const ExperimentConfig& c) {
  ojson j;
  ojson d;
  switch (c.dataset.kind) {
    case DatasetSpec::Kind::kPath: d["path"] = c.dataset.path; break;
    case DatasetSpec::Kind::kPreset:
      d["preset"] = c.dataset.preset;
      d["scale"] = c.dataset.scale;
      break;
    case DatasetSpec::Kind::kRing:
      d["ring"] = {{"graphs", c.dataset.ring.graphs},
                   {"vertices_per_type", c.dataset.ring.vertices_per_type},
                   {"feature_dim", c.dataset.ring.feature_dim},
                   {"avg_degree", c.dataset.ring.avg_degree}};
      break;
    case DatasetSpec::Kind::kSynthetic: d["synthetic"] = synthetic_to_json(c.dataset.synthetic); break;
  }
  j["dataset"] = std::move(d);
  j["model"] = std::string(model_name(c.model));
  j["seed"] = c.seed;
  j["hidden_dim"] = c.hidden_dim;
  j["num_layers"] = c.num_layers == 0 ? default_num_layers(c.model) : c.num_layers;
  j["num_lanes"] = c.num_lanes;
  j["threshold"] = c.threshold;
  j["fusion"] = c.fusion;
  j["balance"] = c.balance;
  j["rab"] = c.rab;
  j["schedule"] = c.schedule.to_string();
  if (!c.params_path.empty()) j["params"] = c.params_path;
  HardwareConfig hw = c.hardware;
  hw.num_lanes = c.num_lanes;
  hw.na_queue_capacity = c.threshold;
  j["hardware"] = ojson::parse(hardware_to_json(hw));
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

// ---- running -------------------------------------------------------------

HetGraph build_dataset(const DatasetSpec& d, std::uint64_t seed) {
  switch (d.kind) {
    case DatasetSpec::Kind::kPath: return load_hetgraph(d.path).with_generated_features(seed);
    case DatasetSpec::Kind::kPreset: return gen_synthetic(dataset_preset(d.preset, d.scale, seed));
    case DatasetSpec::Kind::kRing:
      return gen_synthetic(ring_preset(d.ring.graphs, d.ring.vertices_per_type, d.ring.feature_dim,
                                       d.ring.avg_degree, seed));
    case DatasetSpec::Kind::kSynthetic: {
      SyntheticSpec s = d.synthetic;
      s.seed = seed;
      return gen_synthetic(s);
    }
  }
  throw std::invalid_argument("unknown dataset kind");
}

ExecutionOrder resolve_schedule(const ScheduleSpec& s, const SimilarityHypergraph& h) {
  switch (s.kind) {
    case ScheduleSpec::Kind::kSimilarity: return shortest_hamilton_path(h);
    case ScheduleSpec::Kind::kRandom: return random_order(h, s.seed);
    case ScheduleSpec::Kind::kGiven: return order_from_json(h, read_file(s.path));
  }
  throw std::invalid_argument("unknown schedule kind");
}

PreparedRun prepare_run(const ExperimentConfig& cfg) {
  validate_config(cfg);
  HetGraph g = build_dataset(cfg.dataset, cfg.seed);
  std::vector<SemanticGraph> sgs = select_semantic_graphs(g, cfg.model);
  ModelParams params;
  if (cfg.params_path.empty()) {
    params = generate_params(cfg.model, g, sgs, cfg.seed, cfg.hidden_dim, cfg.num_layers);
  } else {
    std::ifstream in(cfg.params_path);
    if (!in) throw std::runtime_error("cannot open '" + cfg.params_path + "'");
    params = read_params(in, cfg.params_path);
    if (params.kind != cfg.model) {
      throw std::invalid_argument("params file is for " + std::string(model_name(params.kind)) + ", config runs " +
                                  std::string(model_name(cfg.model)));
    }
  }
  SimilarityHypergraph h = build_hypergraph(sgs);
  ExecutionOrder order = resolve_schedule(cfg.schedule, h);
  return {std::move(g), std::move(sgs), std::move(params), std::move(h), std::move(order)};
}

namespace {

FusionOptions fusion_options(const ExperimentConfig& cfg, bool record_trace) {
  FusionOptions o;
  o.num_lanes = cfg.num_lanes;
  o.threshold = cfg.threshold;
  o.balance = cfg.balance;
  o.rab = cfg.rab;
  o.record_trace = record_trace;
  o.element_bytes = cfg.hardware.element_bytes;
  return o;
}

HardwareConfig resolved_hardware(const ExperimentConfig& cfg) {
  HardwareConfig hw = cfg.hardware;
  hw.num_lanes = cfg.num_lanes;
  hw.na_queue_capacity = cfg.threshold;
  return hw;
}

}  // namespace

RunOutcome execute_run(const ExperimentConfig& cfg, const PreparedRun& prep) {
  RunOutcome out;
  out.fused = run_fused(prep.graph, prep.sgs, prep.params, prep.order.indices, fusion_options(cfg, true));
  out.metrics = replay(out.fused.trace, resolved_hardware(cfg), cfg.fusion ? ReplayMode::kFused : ReplayMode::kStaged);
  return out;
}

std::string schedule_json(const ExperimentConfig& cfg, const ExecutionOrder& order) {
  ojson j;
  j["schedule"] = cfg.schedule.to_string();
  j["order"] = order.ids;
  j["cost"] = order.cost;
  j["num_lanes"] = cfg.num_lanes;
  ojson waves = ojson::array();
  for (std::size_t i = 0; i < order.ids.size(); i += cfg.num_lanes) {
    const std::size_t end = std::min(order.ids.size(), i + cfg.num_lanes);
    waves.push_back(std::vector<std::string>(order.ids.begin() + i, order.ids.begin() + end));
  }
  j["waves"] = std::move(waves);
  return j.dump(2) + "\n";
}

std::vector<std::string> write_run_outputs(const ExperimentConfig& cfg, const PreparedRun& prep,
                                           const RunOutcome& out, const std::string& command) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  const std::vector<std::string> files = {"metrics.json", "metrics.csv", "embeddings.csv", "schedule.json",
                                          "manifest.json"};
  write_file(dir / files[0], metrics_to_json(out.metrics));
  write_file(dir / files[1], metrics_csv_header() + "\n" + metrics_to_csv_row(out.metrics) + "\n");
  write_file(dir / files[2], embeddings_csv(prep.graph, out.fused.embeddings));
  write_file(dir / files[3], schedule_json(cfg, prep.order));

  ojson m;
  m["tool"] = "hihgnn-sim";
  m["version"] = kVersion;
  m["schema_version"] = 1;
  m["command"] = command;
  m["created_utc"] = utc_timestamp();
  m["config"] = ojson::parse(config_to_json(cfg));
  std::uint64_t vertices = 0;
  for (const VertexType& t : prep.graph.vertex_types()) vertices += t.count;
  ojson sg_ids = ojson::array();
  for (const SemanticGraph& s : prep.sgs) sg_ids.push_back({{"id", s.id}, {"edges", s.num_edges()}});
  m["graph"] = {{"vertex_types", prep.graph.vertex_types().size()},
                {"vertices", vertices},
                {"edges", prep.graph.total_edges()},
                {"semantic_graphs", sg_ids}};
  const FusionStats& st = out.fused.stats;
  m["engine"] = {{"rounds", st.rounds},
                 {"fp_events", st.fp_events},
                 {"theta_events", st.theta_events},
                 {"na_deferred", st.na_deferred},
                 {"na_fp_hit", st.na_fp_hit},
                 {"na_full_hit", st.na_full_hit},
                 {"na_recomputed", st.na_recomputed},
                 {"sync_events", st.sync_events},
                 {"max_fp_per_vertex_scope", st.max_fp_per_vertex_scope},
                 {"max_theta_per_vertex_graph", st.max_theta_per_vertex_graph},
                 {"fp_violations", st.fp_violations},
                 {"theta_violations", st.theta_violations}};
  m["artifacts"] = files;
  write_file(dir / files[4], m.dump(2) + "\n");
  return files;
}

CompareOutcome compare_run(const ExperimentConfig& cfg, const PreparedRun& prep) {
  const EmbeddingResult want = run_oracle(prep.graph, prep.sgs, prep.params);
  FusionResult got = run_fused(prep.graph, prep.sgs, prep.params, prep.order.indices, fusion_options(cfg, false));
  CompareOutcome c;
  if (cfg.model == ModelKind::kShgn) {
    c.compared = "na";
    double worst = 0.0;
    if (got.embeddings.z.size() != want.z.size()) worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < want.z.size() && i < got.embeddings.z.size(); ++i) {
      const Matrix& a = got.embeddings.z[i];
      const Matrix& b = want.z[i];
      if (a.rows() != b.rows() || a.cols() != b.cols()) {
        worst = std::numeric_limits<double>::infinity();
        break;
      }
      worst = std::max(worst, max_relative_error(a.values(), b.values()));
    }
    c.max_error = worst;
  } else {
    c.compared = "embeddings";
    c.max_error = compare_embeddings(got.embeddings, want);
  }
  return c;
}

// ---- sweeps --------------------------------------------------------------

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "lanes") return SweepAxis::kLanes;
  if (text == "schedules") return SweepAxis::kSchedules;
  if (text == "graph-count") return SweepAxis::kGraphCount;
  throw std::invalid_argument("sweep axis must be lanes, schedules or graph-count, got '" + text + "'");
}

std::vector<std::string> default_sweep_values(SweepAxis axis, std::uint32_t random_orders) {
  switch (axis) {
    case SweepAxis::kLanes: return {"1", "2", "4", "8"};
    case SweepAxis::kSchedules: {
      std::vector<std::string> v{"similarity"};
      for (std::uint32_t i = 1; i <= random_orders; ++i) v.push_back("random:" + std::to_string(i));
      return v;
    }
    case SweepAxis::kGraphCount: return {"4", "8", "12"};
  }
  return {};
}

unsigned sweep_jobs(unsigned requested) {
  unsigned jobs = std::max(1u, requested);
  if (const char* env = std::getenv("HIHGNN_SIM_THREADS"); env && *env) {
    const std::uint64_t cap = parse_u64(env);
    if (cap == 0) throw std::invalid_argument("HIHGNN_SIM_THREADS must be at least 1");
    jobs = static_cast<unsigned>(std::min<std::uint64_t>(jobs, cap));
  }
  return jobs;
}

namespace {

struct SweepPoint {
  std::string value;
  ExperimentConfig cfg;
  bool random = false;
  // results
  std::uint64_t cycles = 0;
  std::uint64_t dram = 0;
  double fp_hit = 0.0;
};

void run_points(std::vector<SweepPoint>& points, unsigned jobs) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        SweepPoint& p = points[i];
        const PreparedRun prep = prepare_run(p.cfg);
        const RunOutcome out = execute_run(p.cfg, prep);
        p.cycles = out.metrics.total_cycles;
        p.dram = out.metrics.dram_bytes();
        p.fp_hit = out.metrics.fp_buf.hit_rate;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(points.size()));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < n; ++t) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::string csv_row(const std::string& axis, const std::string& value, const std::string& schedule,
                    std::uint32_t lanes, const std::string& mode, double cycles, double dram, double fp_hit,
                    double base_cycles, double base_dram) {
  return axis + ',' + value + ',' + schedule + ',' + std::to_string(lanes) + ',' + mode + ',' +
         format_double(cycles) + ',' + format_double(dram) + ',' + format_double(fp_hit) + ',' +
         format_double(cycles == 0 ? 0.0 : base_cycles / cycles) + ',' +
         format_double(base_dram == 0 ? 0.0 : dram / base_dram) + '\n';
}

}  // namespace

std::string run_sweep(const ExperimentConfig& base, const SweepOptions& opt) {
  if (opt.values.empty()) throw std::invalid_argument("sweep axis has no values");
  const char* axis_name = opt.axis == SweepAxis::kLanes       ? "lanes"
                          : opt.axis == SweepAxis::kSchedules ? "schedules"
                                                              : "graph-count";
  std::vector<SweepPoint> points;
  switch (opt.axis) {
    case SweepAxis::kLanes:
      for (const std::string& v : opt.values) {
        SweepPoint p{v, base};
        p.cfg.num_lanes = static_cast<std::uint32_t>(parse_u64(v));
        validate_config(p.cfg);
        points.push_back(std::move(p));
      }
      break;
    case SweepAxis::kSchedules:
      for (const std::string& v : opt.values) {
        SweepPoint p{v, base};
        p.cfg.schedule = ScheduleSpec::parse(v);
        p.random = p.cfg.schedule.kind == ScheduleSpec::Kind::kRandom;
        validate_config(p.cfg);
        points.push_back(std::move(p));
      }
      break;
    case SweepAxis::kGraphCount:
      if (base.dataset.kind != DatasetSpec::Kind::kRing) {
        throw std::invalid_argument("a graph-count sweep needs a ring dataset");
      }
      if (opt.random_orders == 0) throw std::invalid_argument("a graph-count sweep needs random orders");
      for (const std::string& v : opt.values) {
        SweepPoint p{v, base};
        p.cfg.dataset.ring.graphs = static_cast<std::uint32_t>(parse_u64(v));
        p.cfg.schedule = ScheduleSpec{};
        points.push_back(p);
        for (std::uint32_t s = 1; s <= opt.random_orders; ++s) {
          SweepPoint r = p;
          r.cfg.schedule = ScheduleSpec{ScheduleSpec::Kind::kRandom, s, {}};
          r.random = true;
          points.push_back(std::move(r));
        }
      }
      break;
  }
  run_points(points, sweep_jobs(opt.jobs));

  std::string csv =
      "axis,value,schedule,num_lanes,mode,total_cycles,dram_bytes,fp_buf_hit_rate,speedup,normalized_dram\n";
  auto mode = [](const ExperimentConfig& c) { return c.fusion ? "fused" : "staged"; };
  auto emit_group = [&](const std::string& value, std::size_t begin, std::size_t end, bool first_is_base) {
    double rc = 0, rd = 0, rh = 0;
    std::size_t nr = 0;
    for (std::size_t i = begin; i < end; ++i) {
      if (points[i].random) {
        rc += double(points[i].cycles);
        rd += double(points[i].dram);
        rh += points[i].fp_hit;
        ++nr;
      }
    }
    double base_c = double(points[begin].cycles), base_d = double(points[begin].dram);
    if (nr > 0 && !first_is_base) {
      base_c = rc / double(nr);
      base_d = rd / double(nr);
    }
    for (std::size_t i = begin; i < end; ++i) {
      const SweepPoint& p = points[i];
      csv += csv_row(axis_name, value.empty() ? p.value : value, p.cfg.schedule.to_string(), p.cfg.num_lanes,
                     mode(p.cfg), double(p.cycles), double(p.dram), p.fp_hit, base_c, base_d);
    }
    if (nr > 0) {
      const SweepPoint& p = points[begin];
      csv += csv_row(axis_name, value.empty() ? "random-mean" : value, "random-mean", p.cfg.num_lanes,
                     mode(p.cfg), rc / double(nr), rd / double(nr), rh / double(nr), base_c, base_d);
    }
  };
  switch (opt.axis) {
    case SweepAxis::kLanes: emit_group("", 0, points.size(), true); break;
    case SweepAxis::kSchedules: emit_group("", 0, points.size(), false); break;
    case SweepAxis::kGraphCount: {
      const std::size_t per = 1 + opt.random_orders;
      for (std::size_t i = 0; i < points.size(); i += per) emit_group(points[i].value, i, i + per, false);
      break;
    }
  }
  return csv;
}

}  // namespace hihgnn
