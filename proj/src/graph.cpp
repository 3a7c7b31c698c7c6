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

#include "hihgnn/graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace hihgnn {

CscMatrix::CscMatrix(std::uint32_t num_src, std::uint32_t num_dst)
    : num_src_(num_src), num_dst_(num_dst), col_ptr_(static_cast<std::size_t>(num_dst) + 1, 0) {}

CscMatrix CscMatrix::from_edges(std::uint32_t num_src, std::uint32_t num_dst,
                                std::vector<Edge> edges, DuplicatePolicy dups) {
  for (const Edge& e : edges) {
    if (e.src >= num_src || e.dst >= num_dst) {
      throw std::out_of_range("edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                              ") outside " + std::to_string(num_src) + " x " +
                              std::to_string(num_dst));
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.dst != b.dst ? a.dst < b.dst : a.src < b.src;
  });
  auto dup = std::adjacent_find(edges.begin(), edges.end());
  if (dup != edges.end()) {
    if (dups == DuplicatePolicy::kReject) {
      throw std::invalid_argument("duplicate edge (" + std::to_string(dup->src) + ", " +
                                  std::to_string(dup->dst) + ")");
    }
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  }

  CscMatrix m(num_src, num_dst);
  m.row_idx_.reserve(edges.size());
  for (const Edge& e : edges) {
    ++m.col_ptr_[e.dst + 1];
    m.row_idx_.push_back(e.src);
  }
  for (std::size_t v = 0; v < num_dst; ++v) m.col_ptr_[v + 1] += m.col_ptr_[v];
  return m;
}

std::vector<Edge> CscMatrix::edges() const {
  std::vector<Edge> out;
  out.reserve(nnz());
  for (VertexId v = 0; v < num_dst_; ++v) {
    for (VertexId u : sources_of(v)) out.push_back({u, v});
  }
  return out;
}

CscMatrix CscMatrix::transpose() const {
  CscMatrix t(num_dst_, num_src_);
  t.row_idx_.resize(nnz());
  for (VertexId u : row_idx_) ++t.col_ptr_[u + 1];
  for (std::size_t u = 0; u < num_src_; ++u) t.col_ptr_[u + 1] += t.col_ptr_[u];
  std::vector<std::uint64_t> cursor(t.col_ptr_.begin(), t.col_ptr_.end() - 1);
  // Walking columns in ascending order keeps each transposed column sorted.
  for (VertexId v = 0; v < num_dst_; ++v) {
    for (VertexId u : sources_of(v)) t.row_idx_[cursor[u]++] = v;
  }
  return t;
}

HetGraph::HetGraph(std::vector<VertexType> vertex_types, std::vector<RelationType> relations,
                   std::vector<CscMatrix> adjacency, std::vector<Matrix> raw_features,
                   std::vector<MetapathSpec> metapaths)
    : vertex_types_(std::move(vertex_types)),
      relations_(std::move(relations)),
      adjacency_(std::move(adjacency)),
      raw_features_(std::move(raw_features)),
      metapaths_(std::move(metapaths)) {
  if (relations_.empty()) {
    throw std::invalid_argument("graph has no relations; a heterogeneous graph needs edge types");
  }
  if (vertex_types_.size() + relations_.size() <= 2) {
    throw std::invalid_argument("|vertex types| + |relations| must exceed 2 for a heterogeneous graph");
  }
  std::set<std::string_view> names;
  for (const VertexType& t : vertex_types_) {
    if (t.name.empty()) throw std::invalid_argument("vertex type with empty name");
    if (t.count == 0) throw std::invalid_argument("vertex type '" + t.name + "' has count 0");
    if (!names.insert(t.name).second) {
      throw std::invalid_argument("duplicate vertex type '" + t.name + "'");
    }
  }
  names.clear();
  for (const RelationType& r : relations_) {
    if (!names.insert(r.name).second) throw std::invalid_argument("duplicate relation '" + r.name + "'");
    if (r.src >= vertex_types_.size() || r.dst >= vertex_types_.size()) {
      throw std::invalid_argument("relation '" + r.name + "' references a missing vertex type");
    }
  }
  if (adjacency_.size() != relations_.size()) {
    throw std::invalid_argument("one adjacency matrix per relation required");
  }
  for (std::size_t r = 0; r < relations_.size(); ++r) {
    const CscMatrix& a = adjacency_[r];
    if (a.num_src() != vertex_types_[relations_[r].src].count ||
        a.num_dst() != vertex_types_[relations_[r].dst].count) {
      throw std::invalid_argument("adjacency of '" + relations_[r].name + "' has wrong shape");
    }
    auto ptr = a.col_ptr();
    if (!std::is_sorted(ptr.begin(), ptr.end()) || ptr.back() != a.nnz()) {
      throw std::invalid_argument("adjacency of '" + relations_[r].name + "' has bad column pointers");
    }
  }
  if (raw_features_.size() != vertex_types_.size()) raw_features_.resize(vertex_types_.size());
  for (std::size_t t = 0; t < vertex_types_.size(); ++t) {
    const Matrix& f = raw_features_[t];
    if (f.empty()) continue;
    if (vertex_types_[t].feature_dim == 0) {
      throw std::invalid_argument("type '" + vertex_types_[t].name + "' has feature_dim 0 but features");
    }
    if (f.rows() != vertex_types_[t].count || f.cols() != vertex_types_[t].feature_dim) {
      throw std::invalid_argument("features of '" + vertex_types_[t].name + "' have wrong shape");
    }
    if (!f.all_finite()) {
      throw std::invalid_argument("features of '" + vertex_types_[t].name + "' are not finite");
    }
  }
  names.clear();
  for (const MetapathSpec& m : metapaths_) {
    if (!names.insert(m.name).second) throw std::invalid_argument("duplicate metapath '" + m.name + "'");
    if (m.relations.empty()) throw std::invalid_argument("metapath '" + m.name + "' is empty");
    for (std::size_t i = 0; i < m.relations.size(); ++i) {
      if (m.relations[i] >= relations_.size()) {
        throw std::invalid_argument("metapath '" + m.name + "' references a missing relation");
      }
      if (i > 0 && relations_[m.relations[i - 1]].dst != relations_[m.relations[i]].src) {
        throw std::invalid_argument("metapath '" + m.name + "' is not type-compatible at step " +
                                    std::to_string(i));
      }
    }
  }
}

std::optional<TypeId> HetGraph::find_type(std::string_view name) const {
  for (std::size_t i = 0; i < vertex_types_.size(); ++i) {
    if (vertex_types_[i].name == name) return static_cast<TypeId>(i);
  }
  return std::nullopt;
}

std::optional<RelationId> HetGraph::find_relation(std::string_view name) const {
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    if (relations_[i].name == name) return static_cast<RelationId>(i);
  }
  return std::nullopt;
}

std::optional<std::size_t> HetGraph::find_metapath(std::string_view name) const {
  for (std::size_t i = 0; i < metapaths_.size(); ++i) {
    if (metapaths_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t HetGraph::total_edges() const {
  std::size_t n = 0;
  for (const CscMatrix& a : adjacency_) n += a.nnz();
  return n;
}

HetGraph HetGraph::with_generated_features(std::uint64_t seed) const {
  std::vector<Matrix> features = raw_features_;
  for (std::size_t t = 0; t < vertex_types_.size(); ++t) {
    const VertexType& vt = vertex_types_[t];
    if (!features[t].empty() || vt.feature_dim == 0) continue;
    Rng rng(derive_seed(seed, "features/" + vt.name));
    Matrix f(vt.count, vt.feature_dim);
    for (double& x : f.values()) x = rng.uniform(-1.0, 1.0);
    features[t] = std::move(f);
  }
  return HetGraph(vertex_types_, relations_, adjacency_, std::move(features), metapaths_);
}

namespace {

std::vector<VertexId> collect_targets(const CscMatrix& a) {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < a.num_dst(); ++v) {
    if (a.in_degree(v) > 0) out.push_back(v);
  }
  return out;
}

std::vector<TypeId> touched(TypeId a, TypeId b) {
  if (a == b) return {a};
  return {std::min(a, b), std::max(a, b)};
}

}  // namespace

SemanticGraph build_relation_graph(const HetGraph& g, RelationId r) {
  if (r >= g.relations().size()) throw std::invalid_argument("unknown relation id " + std::to_string(r));
  const RelationType& rel = g.relation(r);
  SemanticGraph sg;
  sg.id = rel.name;
  sg.src_type = rel.src;
  sg.dst_type = rel.dst;
  sg.relation = r;
  sg.edges = g.adjacency(r);
  sg.targets = collect_targets(sg.edges);
  sg.types_touched = touched(rel.src, rel.dst);
  return sg;
}

SemanticGraph build_relation_graph(const HetGraph& g, std::string_view relation_name) {
  auto r = g.find_relation(relation_name);
  if (!r) throw std::invalid_argument("unknown relation '" + std::string(relation_name) + "'");
  return build_relation_graph(g, *r);
}

SemanticGraph build_metapath_graph(const HetGraph& g, const MetapathSpec& m) {
  if (m.relations.empty()) throw std::invalid_argument("metapath '" + m.name + "' is empty");
  for (std::size_t i = 0; i < m.relations.size(); ++i) {
    if (m.relations[i] >= g.relations().size()) {
      throw std::invalid_argument("metapath '" + m.name + "' references a missing relation");
    }
    if (i > 0 && g.relation(m.relations[i - 1]).dst != g.relation(m.relations[i]).src) {
      throw std::invalid_argument("metapath '" + m.name + "' is not type-compatible at step " +
                                  std::to_string(i));
    }
  }

  const TypeId src_type = g.relation(m.relations.front()).src;
  const TypeId dst_type = g.relation(m.relations.back()).dst;
  const std::uint32_t num_src = g.vertex_type(src_type).count;
  const std::uint32_t num_dst = g.vertex_type(dst_type).count;

  // Walk the chain backwards from every final target through the CSC
  // in-neighbor lists; a per-level stamp array deduplicates the frontier.
  const std::size_t steps = m.relations.size();
  std::vector<std::vector<std::uint32_t>> stamp(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    stamp[i].assign(g.vertex_type(g.relation(m.relations[i]).src).count, 0);
  }

  CscMatrix result(num_src, num_dst);
  std::vector<Edge> edges;
  std::vector<VertexId> frontier;
  std::vector<VertexId> next;
  for (VertexId v = 0; v < num_dst; ++v) {
    const std::uint32_t tag = v + 1;
    frontier.assign(1, v);
    for (std::size_t step = steps; step-- > 0;) {
      const CscMatrix& a = g.adjacency(m.relations[step]);
      next.clear();
      for (VertexId w : frontier) {
        for (VertexId u : a.sources_of(w)) {
          if (stamp[step][u] != tag) {
            stamp[step][u] = tag;
            next.push_back(u);
          }
        }
      }
      frontier.swap(next);
      if (frontier.empty()) break;
    }
    for (VertexId u : frontier) edges.push_back({u, v});
  }
  result = CscMatrix::from_edges(num_src, num_dst, std::move(edges), DuplicatePolicy::kReject);

  SemanticGraph sg;
  sg.id = m.name;
  sg.src_type = src_type;
  sg.dst_type = dst_type;
  if (steps == 1) sg.relation = m.relations.front();
  sg.edges = std::move(result);
  sg.targets = collect_targets(sg.edges);
  sg.types_touched = touched(src_type, dst_type);
  return sg;
}

}  // namespace hihgnn
