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

#include "hihgnn/trace.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "hihgnn/common.hpp"
#include "json.hpp"

namespace hihgnn {

namespace {

constexpr std::string_view kStageNames[] = {"FP", "THETA", "NA", "LSF", "GSF", "FINAL", "SYNC"};
constexpr std::string_view kReuseNames[] = {"none", "miss", "fp-hit", "full-hit"};

}  // namespace

std::string_view stage_name(Stage s) { return kStageNames[static_cast<int>(s)]; }

Stage parse_stage(std::string_view s) {
  for (int i = 0; i < kNumStages; ++i) {
    if (kStageNames[i] == s) return static_cast<Stage>(i);
  }
  throw std::invalid_argument("unknown stage '" + std::string(s) + "'");
}

std::string_view reuse_name(Reuse r) { return kReuseNames[static_cast<int>(r)]; }

Reuse parse_reuse(std::string_view s) {
  for (int i = 0; i < 4; ++i) {
    if (kReuseNames[i] == s) return static_cast<Reuse>(i);
  }
  throw std::invalid_argument("unknown reuse outcome '" + std::string(s) + "'");
}

void write_trace(std::ostream& out, const Trace& t) {
  const TraceHeader& h = t.header;
  nlohmann::ordered_json j;
  j["kind"] = "header";
  j["model"] = h.model;
  j["hidden_dim"] = h.hidden_dim;
  j["element_bytes"] = h.element_bytes;
  j["num_lanes"] = h.num_lanes;
  j["num_layers"] = h.num_layers;
  j["threshold"] = h.threshold;
  j["rab"] = h.rab;
  j["balance"] = h.balance;
  j["type_names"] = h.type_names;
  j["type_counts"] = h.type_counts;
  auto graphs = nlohmann::ordered_json::array();
  for (const TraceGraphInfo& g : h.graphs) {
    graphs.push_back({{"id", g.id},
                      {"src_type", g.src_type},
                      {"dst_type", g.dst_type},
                      {"num_edges", g.num_edges},
                      {"num_targets", g.num_targets}});
  }
  j["graphs"] = std::move(graphs);
  j["order"] = h.order;
  out << j.dump() << '\n';

  std::string line;
  for (const TraceEvent& e : t.events) {
    line.clear();
    line += "{\"r\":" + std::to_string(e.round);
    line += ",\"st\":\"";
    line += stage_name(e.stage);
    line += "\",\"l\":" + std::to_string(e.layer);
    line += ",\"ln\":" + std::to_string(e.lane);
    line += ",\"sg\":" + std::to_string(e.sg);
    line += ",\"t\":" + std::to_string(e.vtype);
    line += ",\"sc\":" + std::to_string(e.scope);
    line += ",\"a\":" + std::to_string(e.a);
    line += ",\"b\":" + std::to_string(e.b);
    line += ",\"w\":" + std::to_string(e.width);
    line += ",\"ru\":\"";
    line += reuse_name(e.reuse);
    line += "\",\"ro\":" + std::to_string(e.role) + "}\n";
    out << line;
  }
}

Trace read_trace(std::istream& in, const std::string& source) {
  Trace t;
  std::string raw;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(raw);
      if (!have_header) {
        if (j.value("kind", "") != "header") throw ParseError(source, line, "missing header");
        TraceHeader& h = t.header;
        h.model = j.at("model").get<std::string>();
        h.hidden_dim = j.at("hidden_dim").get<std::uint32_t>();
        h.element_bytes = j.at("element_bytes").get<std::uint32_t>();
        h.num_lanes = j.at("num_lanes").get<std::uint32_t>();
        h.num_layers = j.at("num_layers").get<std::uint32_t>();
        h.threshold = j.at("threshold").get<std::uint64_t>();
        h.rab = j.at("rab").get<bool>();
        h.balance = j.at("balance").get<bool>();
        h.type_names = j.at("type_names").get<std::vector<std::string>>();
        h.type_counts = j.at("type_counts").get<std::vector<std::uint32_t>>();
        for (const auto& g : j.at("graphs")) {
          h.graphs.push_back({g.at("id").get<std::string>(), g.at("src_type").get<std::uint32_t>(),
                              g.at("dst_type").get<std::uint32_t>(),
                              g.at("num_edges").get<std::uint64_t>(),
                              g.at("num_targets").get<std::uint64_t>()});
        }
        h.order = j.at("order").get<std::vector<std::uint32_t>>();
        have_header = true;
        continue;
      }
      TraceEvent e;
      e.round = j.at("r").get<std::uint32_t>();
      e.stage = parse_stage(j.at("st").get<std::string>());
      e.layer = j.at("l").get<std::uint8_t>();
      e.lane = j.at("ln").get<std::uint16_t>();
      e.sg = j.at("sg").get<std::uint16_t>();
      e.vtype = j.at("t").get<std::uint16_t>();
      e.scope = j.at("sc").get<std::uint16_t>();
      e.a = j.at("a").get<std::uint32_t>();
      e.b = j.at("b").get<std::uint32_t>();
      e.width = j.at("w").get<std::uint32_t>();
      e.reuse = parse_reuse(j.at("ru").get<std::string>());
      e.role = j.at("ro").get<std::uint8_t>();
      t.events.push_back(e);
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError(source, line, ex.what());
    } catch (const std::invalid_argument& ex) {
      throw ParseError(source, line, ex.what());
    }
  }
  if (!have_header) throw ParseError(source, line, "empty trace");
  return t;
}

bool trace_closes(const Trace& t, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::uint64_t expected = 0;
  for (const TraceGraphInfo& g : t.header.graphs) expected += g.num_edges;
  std::map<std::uint32_t, std::uint64_t> done;
  for (std::size_t i = 0; i < t.events.size(); ++i) {
    const TraceEvent& e = t.events[i];
    if (i > 0 && e.round < t.events[i - 1].round) {
      return fail("round numbers decrease at event " + std::to_string(i));
    }
    if (e.stage == Stage::kNa && e.reuse != Reuse::kMiss) ++done[e.layer];
  }
  for (std::uint32_t l = 0; l < t.header.num_layers; ++l) {
    if (done[l] != expected) {
      return fail("layer " + std::to_string(l) + ": " + std::to_string(done[l]) +
                  " completed NA events, expected " + std::to_string(expected));
    }
  }
  return true;
}

}  // namespace hihgnn
