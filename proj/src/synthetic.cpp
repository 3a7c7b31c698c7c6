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

#include "hihgnn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace hihgnn {

namespace {

// Uniform sample of m distinct pair indices out of [0, n), returned sorted.
std::vector<std::uint64_t> sample_pairs(std::uint64_t n, std::uint64_t m, Rng& rng) {
  std::vector<std::uint64_t> out;
  out.reserve(m);
  if (m * 2 <= n) {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(m * 2);
    while (out.size() < m) {
      const std::uint64_t k = rng.below(n);
      if (seen.insert(k).second) out.push_back(k);
    }
    std::sort(out.begin(), out.end());
  } else {
    // Selection sampling (Knuth, Algorithm S).
    std::uint64_t needed = m;
    for (std::uint64_t k = 0; k < n && needed > 0; ++k) {
      if (rng.below(n - k) < needed) {
        out.push_back(k);
        --needed;
      }
    }
  }
  return out;
}

}  // namespace

HetGraph gen_synthetic(const SyntheticSpec& spec) {
  std::map<std::string, TypeId> type_index;
  for (std::size_t t = 0; t < spec.types.size(); ++t) {
    if (!type_index.emplace(spec.types[t].name, static_cast<TypeId>(t)).second) {
      throw std::invalid_argument("duplicate vertex type '" + spec.types[t].name + "'");
    }
    if (spec.types[t].count == 0) {
      throw std::invalid_argument("vertex type '" + spec.types[t].name + "' has count 0");
    }
  }
  auto type_of = [&](const std::string& name) {
    auto it = type_index.find(name);
    if (it == type_index.end()) throw std::invalid_argument("unknown vertex type '" + name + "'");
    return it->second;
  };

  std::vector<RelationType> relations;
  std::vector<CscMatrix> adjacency;
  std::map<std::string, RelationId> rel_index;
  for (const SyntheticRelation& sr : spec.relations) {
    RelationType r{sr.name, type_of(sr.src), type_of(sr.dst)};
    const std::uint32_t ns = spec.types[r.src].count;
    const std::uint32_t nd = spec.types[r.dst].count;
    const int modes = int(sr.density.has_value()) + int(sr.edges.has_value()) +
                      int(sr.reverse_of.has_value());
    if (modes != 1) {
      throw std::invalid_argument("relation '" + sr.name +
                                  "' needs exactly one of density, edges, reverse_of");
    }
    if (sr.reverse_of) {
      auto it = rel_index.find(*sr.reverse_of);
      if (it == rel_index.end()) {
        throw std::invalid_argument("relation '" + sr.name + "' reverses unknown or later relation '" +
                                    *sr.reverse_of + "'");
      }
      const RelationType& fwd = relations[it->second];
      if (fwd.src != r.dst || fwd.dst != r.src) {
        throw std::invalid_argument("relation '" + sr.name + "' is not the reverse of '" +
                                    fwd.name + "'");
      }
      adjacency.push_back(adjacency[it->second].transpose());
    } else {
      const std::uint64_t pairs = std::uint64_t(ns) * nd;
      std::uint64_t m = 0;
      if (sr.density) {
        const double d = *sr.density;
        if (!(d > 0.0 && d <= 1.0)) {
          throw std::invalid_argument("relation '" + sr.name + "': density must be in (0, 1]");
        }
        m = std::max<std::uint64_t>(1, std::llround(d * double(pairs)));
      } else {
        m = *sr.edges;
      }
      if (m > pairs) {
        throw std::invalid_argument("relation '" + sr.name + "': " + std::to_string(m) +
                                    " edges do not fit in " + std::to_string(pairs) + " pairs");
      }
      Rng rng(derive_seed(spec.seed, "edges/" + sr.name));
      std::vector<Edge> edges;
      edges.reserve(m);
      for (std::uint64_t k : sample_pairs(pairs, m, rng)) {
        edges.push_back({static_cast<VertexId>(k / nd), static_cast<VertexId>(k % nd)});
      }
      adjacency.push_back(CscMatrix::from_edges(ns, nd, std::move(edges)));
    }
    if (!rel_index.emplace(r.name, static_cast<RelationId>(relations.size())).second) {
      throw std::invalid_argument("duplicate relation '" + r.name + "'");
    }
    relations.push_back(std::move(r));
  }

  std::vector<MetapathSpec> metapaths;
  for (const SyntheticMetapath& sm : spec.metapaths) {
    MetapathSpec m{sm.name, {}};
    for (const std::string& rn : sm.relations) {
      auto it = rel_index.find(rn);
      if (it == rel_index.end()) {
        throw std::invalid_argument("metapath '" + sm.name + "' uses unknown relation '" + rn + "'");
      }
      m.relations.push_back(it->second);
    }
    metapaths.push_back(std::move(m));
  }

  HetGraph g(spec.types, std::move(relations), std::move(adjacency),
             std::vector<Matrix>(spec.types.size()), std::move(metapaths));
  return g.with_generated_features(spec.seed);
}

namespace {

SyntheticRelation exact(std::string name, std::string src, std::string dst, std::uint64_t edges) {
  SyntheticRelation r{std::move(name), std::move(src), std::move(dst), {}, {}, {}};
  r.edges = edges;
  return r;
}

SyntheticRelation reverse(std::string name, std::string src, std::string dst, std::string of) {
  SyntheticRelation r{std::move(name), std::move(src), std::move(dst), {}, {}, {}};
  r.reverse_of = std::move(of);
  return r;
}

}  // namespace

SyntheticSpec dataset_preset(const std::string& name, double scale, std::uint64_t seed) {
  if (!(scale > 0.0 && scale <= 1.0)) throw std::invalid_argument("preset scale must be in (0, 1]");
  auto count = [&](std::uint32_t n) {
    return static_cast<std::uint32_t>(std::max(1.0, std::ceil(n * scale)));
  };
  auto edges = [&](std::uint64_t m) {
    return static_cast<std::uint64_t>(std::max(1.0, std::round(double(m) * scale)));
  };

  SyntheticSpec s;
  s.seed = seed;
  if (name == "imdb") {
    s.types = {{"M", count(4932), 3489}, {"D", count(2393), 3341}, {"A", count(6124), 3341},
               {"K", count(7971), 0}};
    s.relations = {exact("AM", "A", "M", edges(14779)), reverse("MA", "M", "A", "AM"),
                   exact("KM", "K", "M", edges(23610)), reverse("MK", "M", "K", "KM"),
                   exact("DM", "D", "M", edges(4932)),  reverse("MD", "M", "D", "DM")};
    s.metapaths = {{"MDM", {"MD", "DM"}}, {"MAM", {"MA", "AM"}}, {"MKM", {"MK", "KM"}}};
  } else if (name == "acm") {
    s.types = {{"P", count(3025), 1902}, {"A", count(5959), 1902}, {"S", count(56), 1902},
               {"T", count(1902), 0}};
    s.relations = {exact("TP", "T", "P", edges(255619)), reverse("PT", "P", "T", "TP"),
                   exact("SP", "S", "P", edges(3025)),   reverse("PS", "P", "S", "SP"),
                   exact("PP", "P", "P", edges(5343)),   reverse("-PP", "P", "P", "PP"),
                   exact("AP", "A", "P", edges(9949)),   reverse("PA", "P", "A", "AP")};
    s.metapaths = {{"PPSP", {"PP", "PS", "SP"}}, {"PSP", {"PS", "SP"}},
                   {"PPAP", {"PP", "PA", "AP"}}, {"PAP", {"PA", "AP"}}};
  } else if (name == "dblp") {
    s.types = {{"A", count(4057), 334}, {"P", count(14328), 4231}, {"T", count(7723), 50},
               {"V", count(20), 0}};
    s.relations = {exact("AP", "A", "P", edges(19645)), reverse("PA", "P", "A", "AP"),
                   exact("TP", "T", "P", edges(85810)), reverse("PT", "P", "T", "TP"),
                   exact("VP", "V", "P", edges(14328)), reverse("PV", "P", "V", "VP")};
    s.metapaths = {{"APA", {"AP", "PA"}},
                   {"APTPA", {"AP", "PT", "TP", "PA"}},
                   {"APVPA", {"AP", "PV", "VP", "PA"}}};
  } else {
    throw std::invalid_argument("unknown dataset preset '" + name + "' (imdb, acm, dblp)");
  }
  // Edges shrink linearly but vertex pairs quadratically, so dense relations
  // saturate at small scales.
  auto type_count = [&](const std::string& t) {
    for (const VertexType& vt : s.types) {
      if (vt.name == t) return std::uint64_t{vt.count};
    }
    return std::uint64_t{0};
  };
  for (SyntheticRelation& r : s.relations) {
    if (r.edges) r.edges = std::min(*r.edges, type_count(r.src) * type_count(r.dst));
  }
  return s;
}

SyntheticSpec ring_preset(std::uint32_t num_graphs, std::uint32_t vertices_per_type,
                          std::uint32_t feature_dim, double avg_degree, std::uint64_t seed) {
  if (num_graphs < 2) throw std::invalid_argument("ring preset needs at least 2 graphs");
  if (vertices_per_type == 0) throw std::invalid_argument("ring preset needs vertices");
  SyntheticSpec s;
  s.seed = seed;
  for (std::uint32_t i = 0; i < num_graphs; ++i) {
    s.types.push_back({"T" + std::to_string(i), vertices_per_type, feature_dim});
  }
  const auto m = static_cast<std::uint64_t>(std::max(1.0, std::round(avg_degree * vertices_per_type)));
  for (std::uint32_t i = 0; i < num_graphs; ++i) {
    const std::string src = "T" + std::to_string(i);
    const std::string dst = "T" + std::to_string((i + 1) % num_graphs);
    const std::string rel = "R" + std::to_string(i);
    s.relations.push_back(exact(rel, src, dst, m));
    s.metapaths.push_back({rel, {rel}});
  }
  return s;
}

}  // namespace hihgnn
