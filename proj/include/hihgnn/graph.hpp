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
 * @file graph.hpp
 * @brief Heterogeneous graph data model and semantic-graph construction.
 *
 * Vertices are indexed per type, 0-based, in file order. Each relation owns
 * one adjacency matrix in compressed-sparse-column layout: column v lists the
 * sources u of every edge u -> v, sorted ascending. Semantic graphs reuse the
 * same layout, so a target's neighbor list is a contiguous span.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hihgnn/common.hpp"

namespace hihgnn {

using TypeId = std::uint32_t;
using RelationId = std::uint32_t;
using VertexId = std::uint32_t;

struct VertexType {
  std::string name;
  std::uint32_t count = 0;
  std::uint32_t feature_dim = 0;  // 0: the dataset ships no raw features

  friend bool operator==(const VertexType&, const VertexType&) = default;
};

struct RelationType {
  std::string name;
  TypeId src = 0;
  TypeId dst = 0;

  friend bool operator==(const RelationType&, const RelationType&) = default;
};

struct MetapathSpec {
  std::string name;
  std::vector<RelationId> relations;

  friend bool operator==(const MetapathSpec&, const MetapathSpec&) = default;
};

struct Edge {
  VertexId src = 0;
  VertexId dst = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class DuplicatePolicy { kReject, kCollapse };

/// Compressed sparse column adjacency; columns are targets.
class CscMatrix {
 public:
  CscMatrix() = default;
  CscMatrix(std::uint32_t num_src, std::uint32_t num_dst);

  /// Sorts by (dst, src). Out-of-range endpoints throw std::out_of_range.
  static CscMatrix from_edges(std::uint32_t num_src, std::uint32_t num_dst,
                              std::vector<Edge> edges,
                              DuplicatePolicy dups = DuplicatePolicy::kReject);

  std::uint32_t num_src() const noexcept { return num_src_; }
  std::uint32_t num_dst() const noexcept { return num_dst_; }
  std::size_t nnz() const noexcept { return row_idx_.size(); }

  std::span<const std::uint64_t> col_ptr() const noexcept { return col_ptr_; }
  std::span<const VertexId> row_idx() const noexcept { return row_idx_; }

  std::span<const VertexId> sources_of(VertexId v) const {
    return {row_idx_.data() + col_ptr_[v], static_cast<std::size_t>(col_ptr_[v + 1] - col_ptr_[v])};
  }
  std::uint32_t in_degree(VertexId v) const {
    return static_cast<std::uint32_t>(col_ptr_[v + 1] - col_ptr_[v]);
  }

  /// Edges in storage order: ascending target, then ascending source.
  std::vector<Edge> edges() const;
  CscMatrix transpose() const;

  friend bool operator==(const CscMatrix&, const CscMatrix&) = default;

 private:
  std::uint32_t num_src_ = 0;
  std::uint32_t num_dst_ = 0;
  std::vector<std::uint64_t> col_ptr_{0};
  std::vector<VertexId> row_idx_;
};

/// Immutable heterogeneous graph. The constructor checks every invariant and
/// throws std::invalid_argument on violation.
class HetGraph {
 public:
  HetGraph(std::vector<VertexType> vertex_types, std::vector<RelationType> relations,
           std::vector<CscMatrix> adjacency, std::vector<Matrix> raw_features,
           std::vector<MetapathSpec> metapaths = {});

  std::span<const VertexType> vertex_types() const noexcept { return vertex_types_; }
  std::span<const RelationType> relations() const noexcept { return relations_; }
  std::span<const MetapathSpec> metapaths() const noexcept { return metapaths_; }

  const VertexType& vertex_type(TypeId t) const { return vertex_types_.at(t); }
  const RelationType& relation(RelationId r) const { return relations_.at(r); }
  const CscMatrix& adjacency(RelationId r) const { return adjacency_.at(r); }

  /// Raw features of a type; empty when the type has none.
  const Matrix& raw_features(TypeId t) const { return raw_features_.at(t); }
  bool has_features(TypeId t) const { return !raw_features_.at(t).empty(); }

  std::optional<TypeId> find_type(std::string_view name) const;
  std::optional<RelationId> find_relation(std::string_view name) const;
  std::optional<std::size_t> find_metapath(std::string_view name) const;

  std::size_t total_edges() const;

  /// Copy with seeded features filled in for every type that has a feature
  /// width but no features yet. Existing features are kept.
  HetGraph with_generated_features(std::uint64_t seed) const;

 private:
  std::vector<VertexType> vertex_types_;
  std::vector<RelationType> relations_;
  std::vector<CscMatrix> adjacency_;
  std::vector<Matrix> raw_features_;
  std::vector<MetapathSpec> metapaths_;
};

/// One relation- or metapath-induced graph G^P.
struct SemanticGraph {
  std::string id;
  TypeId src_type = 0;
  TypeId dst_type = 0;
  std::optional<RelationId> relation;  // set when built from a single relation
  CscMatrix edges;
  std::vector<VertexId> targets;       // V^P: in-degree >= 1, ascending
  std::vector<TypeId> types_touched;   // types whose features the graph reads

  std::size_t num_edges() const noexcept { return edges.nnz(); }
};

SemanticGraph build_relation_graph(const HetGraph& g, RelationId r);
SemanticGraph build_relation_graph(const HetGraph& g, std::string_view relation_name);

/// Boolean composition of the chain: (u, v) is an edge iff some path
/// instance of the metapath connects u to v. Self-edges are kept.
SemanticGraph build_metapath_graph(const HetGraph& g, const MetapathSpec& m);

}  // namespace hihgnn
