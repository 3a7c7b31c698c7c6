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
 * @file experiment.hpp
 * @brief Experiment configuration and the run / compare / sweep drivers
 *        behind the command-line front-end.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hihgnn/fusion.hpp"
#include "hihgnn/graph.hpp"
#include "hihgnn/model.hpp"
#include "hihgnn/perf.hpp"
#include "hihgnn/scheduler.hpp"
#include "hihgnn/synthetic.hpp"

namespace hihgnn {

struct ScheduleSpec {
  enum class Kind { kSimilarity, kRandom, kGiven };
  Kind kind = Kind::kSimilarity;
  std::uint64_t seed = 0;  // kRandom
  std::string path;        // kGiven

  /// "similarity", "random:<seed>" or "given:<file>".
  static ScheduleSpec parse(const std::string& text);
  std::string to_string() const;
};

struct RingParams {
  std::uint32_t graphs = 4;
  std::uint32_t vertices_per_type = 1000;
  std::uint32_t feature_dim = 64;
  double avg_degree = 4.0;
};

struct DatasetSpec {
  enum class Kind { kPath, kPreset, kRing, kSynthetic };
  Kind kind = Kind::kPreset;
  std::string path;
  std::string preset = "dblp";
  double scale = 1.0;
  RingParams ring;
  SyntheticSpec synthetic;  // seed is taken from the experiment
};

struct ExperimentConfig {
  DatasetSpec dataset;
  ModelKind model = ModelKind::kHan;
  std::uint64_t seed = 0;
  std::uint32_t hidden_dim = 64;
  std::uint32_t num_layers = 0;  // 0: model default
  std::uint32_t num_lanes = 4;
  std::uint64_t threshold = 256;
  bool fusion = true;
  bool balance = true;
  bool rab = true;
  ScheduleSpec schedule;
  std::string params_path;  // empty: generate from the seed
  HardwareConfig hardware;  // num_lanes mirrors the field above
  std::string output_dir = "out";
};

/// Parses a JSON config. Relative paths resolve against `base_dir`.
/// Throws std::invalid_argument on unknown keys, bad values, a missing seed
/// or a given-schedule file that does not exist.
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);
/// Resolved config, every field present. parse_config accepts it back.
std::string config_to_json(const ExperimentConfig& cfg);

/// Re-checks cross-field consistency after flag overrides.
void validate_config(const ExperimentConfig& cfg);

/// Sets a HardwareConfig field by its JSON name.
void set_hardware_field(HardwareConfig& hw, const std::string& name, double value);
std::string hardware_to_json(const HardwareConfig& hw);

HetGraph build_dataset(const DatasetSpec& d, std::uint64_t seed);

struct PreparedRun {
  HetGraph graph;
  std::vector<SemanticGraph> sgs;
  ModelParams params;
  SimilarityHypergraph hypergraph;
  ExecutionOrder order;
};

PreparedRun prepare_run(const ExperimentConfig& cfg);
ExecutionOrder resolve_schedule(const ScheduleSpec& s, const SimilarityHypergraph& h);

struct RunOutcome {
  FusionResult fused;
  MetricsReport metrics;
};

/// Functional engine plus replay; the replay mode follows `cfg.fusion`.
RunOutcome execute_run(const ExperimentConfig& cfg, const PreparedRun& prep);

/// Writes metrics.json, metrics.csv, embeddings.csv, schedule.json and
/// manifest.json into cfg.output_dir. Returns the file names.
std::vector<std::string> write_run_outputs(const ExperimentConfig& cfg, const PreparedRun& prep,
                                           const RunOutcome& out, const std::string& command);

std::string schedule_json(const ExperimentConfig& cfg, const ExecutionOrder& order);

struct CompareOutcome {
  double max_error = 0.0;
  std::string compared;  // "embeddings" or "na" (S-HGN)
};

/// Oracle vs fused engine. S-HGN has no fusion stage of its own, so only
/// the per-graph aggregation outputs are compared for it.
CompareOutcome compare_run(const ExperimentConfig& cfg, const PreparedRun& prep);

enum class SweepAxis { kLanes, kSchedules, kGraphCount };
SweepAxis parse_sweep_axis(const std::string& text);

struct SweepOptions {
  SweepAxis axis = SweepAxis::kLanes;
  std::vector<std::string> values;  // empty list is an error
  std::uint32_t random_orders = 10;
  unsigned jobs = 1;
};

/// Default point values per axis: lanes {1,2,4,8}; schedules similarity and
/// random:1..random_orders; graph-count {4,8,12}.
std::vector<std::string> default_sweep_values(SweepAxis axis, std::uint32_t random_orders);

/// One CSV row per point, plus a random-mean row where random orders are
/// involved. Points run on up to `jobs` threads; output order is fixed.
std::string run_sweep(const ExperimentConfig& base, const SweepOptions& opt);

/// Worker count for sweeps: `requested` capped by HIHGNN_SIM_THREADS.
unsigned sweep_jobs(unsigned requested);

}  // namespace hihgnn
