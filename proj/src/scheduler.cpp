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

#include "hihgnn/scheduler.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace hihgnn {

RoundPlan plan_round(std::span<const std::uint64_t> list_sizes, std::uint32_t num_lanes,
                     std::uint64_t threshold, bool balance) {
  if (num_lanes == 0) throw std::invalid_argument("num_lanes must be at least 1");
  if (threshold == 0) throw std::invalid_argument("threshold must be at least 1");
  if (list_sizes.size() > num_lanes) {
    throw std::invalid_argument("more task lists than lanes in one round");
  }
  RoundPlan plan;
  plan.lane_load.assign(num_lanes, 0);

  struct Excess {
    std::uint32_t list;
    std::uint64_t begin;
    std::uint64_t left;
  };
  std::vector<Excess> overflow;
  for (std::uint32_t i = 0; i < list_sizes.size(); ++i) {
    const std::uint64_t take = std::min(list_sizes[i], threshold);
    if (take > 0) {
      plan.assignments.push_back({i, i, 0, take});
      plan.lane_load[i] = take;
    }
    if (list_sizes[i] > take) overflow.push_back({i, take, list_sizes[i] - take});
  }
  if (!balance || overflow.empty()) return plan;

  std::vector<std::uint32_t> fill_order;
  for (std::uint32_t lane = 0; lane < num_lanes; ++lane) {
    if (plan.lane_load[lane] == 0) fill_order.push_back(lane);
  }
  for (std::uint32_t lane = 0; lane < num_lanes; ++lane) {
    if (plan.lane_load[lane] > 0 && plan.lane_load[lane] < threshold) fill_order.push_back(lane);
  }
  std::size_t next = 0;
  for (std::uint32_t lane : fill_order) {
    while (plan.lane_load[lane] < threshold && next < overflow.size()) {
      Excess& ex = overflow[next];
      const std::uint64_t take = std::min(ex.left, threshold - plan.lane_load[lane]);
      plan.assignments.push_back({lane, ex.list, ex.begin, take});
      plan.lane_load[lane] += take;
      ex.begin += take;
      ex.left -= take;
      if (ex.left == 0) ++next;
    }
    if (next == overflow.size()) break;
  }
  return plan;
}

std::vector<std::uint64_t> LanePlan::lane_totals() const {
  std::vector<std::uint64_t> totals(num_lanes, 0);
  for (const RoundPlan& r : rounds) {
    for (const LaneAssignment& a : r.assignments) totals[a.lane] += a.count;
  }
  return totals;
}

LanePlan balance_workloads(std::span<const std::uint64_t> list_sizes, std::uint32_t num_lanes,
                           std::uint64_t threshold, bool balance) {
  LanePlan plan;
  plan.num_lanes = num_lanes;
  plan.threshold = threshold;
  plan.balance = balance;
  if (num_lanes == 0) throw std::invalid_argument("num_lanes must be at least 1");
  for (std::size_t first = 0, wave = 0; first < list_sizes.size(); first += num_lanes, ++wave) {
    const std::size_t n = std::min<std::size_t>(num_lanes, list_sizes.size() - first);
    std::vector<std::uint64_t> left(list_sizes.begin() + first, list_sizes.begin() + first + n);
    while (std::any_of(left.begin(), left.end(), [](std::uint64_t x) { return x > 0; })) {
      RoundPlan r = plan_round(left, num_lanes, threshold, balance);
      for (LaneAssignment& a : r.assignments) {
        left[a.list] -= a.count;
        a.list += static_cast<std::uint32_t>(first);
      }
      plan.rounds.push_back(std::move(r));
      plan.round_wave.push_back(static_cast<std::uint32_t>(wave));
    }
  }
  return plan;
}

PartialStore::PartialStore(std::uint32_t num_vertices, std::uint32_t width,
                           std::uint32_t native_lane, std::uint32_t num_lanes)
    : width_(width),
      native_(native_lane),
      num_lanes_(num_lanes),
      num_(static_cast<std::size_t>(num_vertices) * width, 0.0),
      den_(num_vertices, 0.0),
      synced_(num_vertices, 0),
      remote_(num_vertices) {
  if (native_lane >= num_lanes) throw std::invalid_argument("native lane out of range");
}

void PartialStore::accumulate(std::uint32_t lane, VertexId v, double weight,
                              std::span<const double> row) {
  if (lane >= num_lanes_) throw std::invalid_argument("lane out of range");
  if (synced_[v]) throw std::logic_error("accumulate after sync for vertex " + std::to_string(v));
  double* num = nullptr;
  double* den = nullptr;
  if (lane == native_) {
    num = num_.data() + static_cast<std::size_t>(v) * width_;
    den = &den_[v];
  } else {
    auto& rs = remote_[v];
    auto it = std::find_if(rs.begin(), rs.end(), [&](const Remote& r) { return r.lane == lane; });
    if (it == rs.end()) {
      rs.push_back({lane, std::vector<double>(width_, 0.0), 0.0});
      std::sort(rs.begin(), rs.end(), [](const Remote& a, const Remote& b) { return a.lane < b.lane; });
      it = std::find_if(rs.begin(), rs.end(), [&](const Remote& r) { return r.lane == lane; });
    }
    num = it->num.data();
    den = &it->den;
  }
  for (std::uint32_t j = 0; j < width_; ++j) num[j] += weight * row[j];
  *den += weight;
}

std::vector<std::uint32_t> PartialStore::remote_lanes(VertexId v) const {
  std::vector<std::uint32_t> out;
  for (const Remote& r : remote_[v]) out.push_back(r.lane);
  return out;
}

std::vector<std::uint32_t> PartialStore::sync(VertexId v) {
  if (synced_[v]) throw std::logic_error("vertex " + std::to_string(v) + " merged twice");
  synced_[v] = 1;
  std::vector<std::uint32_t> lanes;
  double* num = num_.data() + static_cast<std::size_t>(v) * width_;
  for (const Remote& r : remote_[v]) {
    for (std::uint32_t j = 0; j < width_; ++j) num[j] += r.num[j];
    den_[v] += r.den;
    lanes.push_back(r.lane);
  }
  remote_[v].clear();
  remote_[v].shrink_to_fit();
  return lanes;
}

std::span<const double> PartialStore::numerator(VertexId v) const {
  return {num_.data() + static_cast<std::size_t>(v) * width_, width_};
}

std::size_t sync_partials(std::span<PartialStore> stores) {
  std::size_t transfers = 0;
  for (PartialStore& s : stores) {
    for (VertexId v = 0; v < s.num_vertices(); ++v) {
      if (!s.synced(v)) transfers += s.sync(v).size();
    }
  }
  return transfers;
}

// ---- similarity ordering -------------------------------------------------

std::uint64_t SimilarityHypergraph::weight_units(std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size()) return 0;
  if (i == j) return denominator;
  return eta[i][j] > 0 ? denominator - eta[i][j] : denominator;
}

double SimilarityHypergraph::weight(std::size_t i, std::size_t j) const {
  return static_cast<double>(weight_units(i, j)) / static_cast<double>(denominator);
}

SimilarityHypergraph build_hypergraph(const std::vector<std::string>& ids,
                                      const std::vector<std::vector<std::uint32_t>>& types) {
  if (ids.empty()) throw std::invalid_argument("similarity graph needs at least one semantic graph");
  if (ids.size() != types.size()) throw std::invalid_argument("one type set per semantic graph");
  SimilarityHypergraph h;
  h.nodes = ids;
  for (const auto& t : types) {
    std::vector<std::uint32_t> s(t);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    h.types.push_back(std::move(s));
  }
  const std::size_t n = ids.size();
  h.eta.assign(n, std::vector<std::uint32_t>(n, 0));
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      std::vector<std::uint32_t> common;
      std::set_intersection(h.types[i].begin(), h.types[i].end(), h.types[j].begin(),
                            h.types[j].end(), std::back_inserter(common));
      h.eta[i][j] = h.eta[j][i] = static_cast<std::uint32_t>(common.size());
      total += common.size();
    }
  }
  h.denominator = std::max<std::uint64_t>(total, 1);
  return h;
}

SimilarityHypergraph build_hypergraph(const std::vector<SemanticGraph>& sgs) {
  std::vector<std::string> ids;
  std::vector<std::vector<std::uint32_t>> types;
  for (const SemanticGraph& sg : sgs) {
    ids.push_back(sg.id);
    types.push_back(sg.types_touched);
  }
  return build_hypergraph(ids, types);
}

std::uint64_t path_cost_units(const SimilarityHypergraph& h, std::span<const std::size_t> path) {
  std::uint64_t c = 0;
  for (std::size_t k = 1; k < path.size(); ++k) c += h.weight_units(path[k - 1], path[k]);
  return c;
}

ExecutionOrder make_order(const SimilarityHypergraph& h, std::vector<std::size_t> path) {
  std::vector<std::uint8_t> seen(h.size(), 0);
  if (path.size() != h.size()) throw std::invalid_argument("order must cover every semantic graph");
  for (std::size_t i : path) {
    if (i >= h.size() || seen[i]) throw std::invalid_argument("order is not a permutation");
    seen[i] = 1;
  }
  ExecutionOrder o;
  o.cost_units = path_cost_units(h, path);
  o.cost = static_cast<double>(o.cost_units) / static_cast<double>(h.denominator);
  for (std::size_t i : path) o.ids.push_back(h.nodes[i]);
  o.indices = std::move(path);
  return o;
}

namespace {

// rank[i] = position of node i when ids are sorted, for lexicographic ties.
std::vector<std::size_t> id_ranks(const SimilarityHypergraph& h) {
  std::vector<std::size_t> idx(h.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return h.nodes[a] < h.nodes[b]; });
  std::vector<std::size_t> rank(h.size());
  for (std::size_t r = 0; r < idx.size(); ++r) rank[idx[r]] = r;
  return rank;
}

ExecutionOrder exact_path(const SimilarityHypergraph& h) {
  const std::size_t n = h.size();
  const std::size_t full = (std::size_t{1} << n) - 1;
  const auto rank = id_ranks(h);
  constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();
  // rest[mask * n + i]: cheapest completion after visiting `mask`, standing
  // on i (i in mask). The final hop to the virtual end costs 0.
  std::vector<std::uint32_t> rest((full + 1) * n, kInf);
  for (std::size_t i = 0; i < n; ++i) rest[full * n + i] = 0;
  for (std::size_t mask = full; mask-- > 1;) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      std::uint32_t best = kInf;
      for (std::size_t j = 0; j < n; ++j) {
        if (mask >> j & 1) continue;
        const std::uint32_t tail = rest[(mask | (std::size_t{1} << j)) * n + j];
        const auto c = static_cast<std::uint32_t>(h.weight_units(i, j)) + tail;
        best = std::min(best, c);
      }
      rest[mask * n + i] = best;
    }
  }
  // Greedy walk over exact completions; among equal costs take the
  // smallest id, which yields the lexicographically smallest optimal path.
  std::vector<std::size_t> path;
  std::size_t mask = 0;
  std::size_t cur = h.virtual_start();
  while (path.size() < n) {
    std::size_t pick = n;
    std::uint64_t pick_cost = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t j = 0; j < n; ++j) {
      if (mask >> j & 1) continue;
      const std::uint64_t c =
          h.weight_units(cur, j) + rest[(mask | (std::size_t{1} << j)) * n + j];
      if (c < pick_cost || (c == pick_cost && rank[j] < rank[pick])) {
        pick = j;
        pick_cost = c;
      }
    }
    path.push_back(pick);
    mask |= std::size_t{1} << pick;
    cur = pick;
  }
  return make_order(h, std::move(path));
}

ExecutionOrder heuristic_path(const SimilarityHypergraph& h) {
  const std::size_t n = h.size();
  const auto rank = id_ranks(h);
  std::vector<std::size_t> best;
  std::uint64_t best_cost = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t start = 0; start < n; ++start) {
    std::vector<std::size_t> path{start};
    std::vector<std::uint8_t> used(n, 0);
    used[start] = 1;
    while (path.size() < n) {
      std::size_t pick = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (used[j]) continue;
        if (pick == n || h.weight_units(path.back(), j) < h.weight_units(path.back(), pick) ||
            (h.weight_units(path.back(), j) == h.weight_units(path.back(), pick) &&
             rank[j] < rank[pick])) {
          pick = j;
        }
      }
      used[pick] = 1;
      path.push_back(pick);
    }
    // 2-opt on the open path: reverse [i, k] when it shortens the walk.
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
          const std::uint64_t before =
              (i > 0 ? h.weight_units(path[i - 1], path[i]) : 0) +
              (k + 1 < n ? h.weight_units(path[k], path[k + 1]) : 0);
          const std::uint64_t after =
              (i > 0 ? h.weight_units(path[i - 1], path[k]) : 0) +
              (k + 1 < n ? h.weight_units(path[i], path[k + 1]) : 0);
          if (after < before) {
            std::reverse(path.begin() + static_cast<std::ptrdiff_t>(i),
                         path.begin() + static_cast<std::ptrdiff_t>(k) + 1);
            improved = true;
          }
        }
      }
    }
    const std::uint64_t c = path_cost_units(h, path);
    if (c < best_cost) {
      best_cost = c;
      best = path;
    }
  }
  return make_order(h, std::move(best));
}

}  // namespace

ExecutionOrder shortest_hamilton_path(const SimilarityHypergraph& h) {
  if (h.size() == 0) throw std::invalid_argument("empty similarity graph");
  return h.size() <= kExactHamiltonLimit ? exact_path(h) : heuristic_path(h);
}

ExecutionOrder random_order(const SimilarityHypergraph& h, std::uint64_t seed) {
  std::vector<std::size_t> path(h.size());
  std::iota(path.begin(), path.end(), 0);
  Rng rng(seed);
  for (std::size_t i = path.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(path[i - 1], path[j]);
  }
  return make_order(h, std::move(path));
}

std::string order_to_json(const ExecutionOrder& o) {
  nlohmann::ordered_json j;
  j["order"] = o.ids;
  j["cost"] = o.cost;
  return j.dump(2) + "\n";
}

ExecutionOrder order_from_json(const SimilarityHypergraph& h, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("schedule file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("order") || !j["order"].is_array()) {
    throw std::invalid_argument("schedule file needs an \"order\" array");
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < h.size(); ++i) index.emplace(h.nodes[i], i);
  std::vector<std::size_t> path;
  for (const auto& item : j["order"]) {
    if (!item.is_string()) throw std::invalid_argument("schedule ids must be strings");
    auto it = index.find(item.get<std::string>());
    if (it == index.end()) {
      throw std::invalid_argument("schedule names unknown semantic graph '" +
                                  item.get<std::string>() + "'");
    }
    path.push_back(it->second);
  }
  return make_order(h, std::move(path));
}

std::string lane_plan_to_json(const LanePlan& plan) {
  nlohmann::ordered_json j;
  j["num_lanes"] = plan.num_lanes;
  j["threshold"] = plan.threshold;
  j["balance"] = plan.balance;
  j["lane_totals"] = plan.lane_totals();
  auto rounds = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < plan.rounds.size(); ++r) {
    nlohmann::ordered_json jr;
    jr["wave"] = plan.round_wave[r];
    auto as = nlohmann::ordered_json::array();
    for (const LaneAssignment& a : plan.rounds[r].assignments) {
      as.push_back({{"lane", a.lane}, {"list", a.list}, {"begin", a.begin}, {"count", a.count}});
    }
    jr["assignments"] = std::move(as);
    rounds.push_back(std::move(jr));
  }
  j["rounds"] = std::move(rounds);
  return j.dump(2) + "\n";
}

}  // namespace hihgnn
