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

#include "hihgnn/graph_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace hihgnn {

namespace {

enum class Block { kNone, kVtypes, kRelations, kEdges, kFeatures, kMetapaths };

bool is_keyword(std::string_view s) {
  return s == "vtypes" || s == "relations" || s == "edges" || s == "features" || s == "metapaths";
}

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  HetGraph parse(std::istream& in) {
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      std::string_view text = raw;
      if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
      auto tok = split_ws(text);
      if (tok.empty()) continue;
      if (is_keyword(tok[0])) {
        open_block(tok);
      } else {
        body_line(tok);
      }
    }
    close_block();
    if (types_.empty()) fail("no vtypes block");

    std::vector<CscMatrix> adjacency;
    for (std::size_t r = 0; r < relations_.size(); ++r) {
      const auto& rel = relations_[r];
      try {
        adjacency.push_back(CscMatrix::from_edges(types_[rel.src].count, types_[rel.dst].count,
                                                  std::move(edges_[r]), DuplicatePolicy::kReject));
      } catch (const std::exception& e) {
        throw ParseError(source_, edge_block_line_[r], "relation " + rel.name + ": " + e.what());
      }
    }
    try {
      return HetGraph(types_, relations_, std::move(adjacency), std::move(features_), metapaths_);
    } catch (const std::invalid_argument& e) {
      throw ParseError(source_, line_, e.what());
    }
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, what); }

  TypeId type_ref(std::string_view name) const {
    auto it = type_index_.find(std::string(name));
    if (it == type_index_.end()) fail("unknown vertex type '" + std::string(name) + "'");
    return it->second;
  }

  RelationId relation_ref(std::string_view name) const {
    auto it = relation_index_.find(std::string(name));
    if (it == relation_index_.end()) fail("unknown relation '" + std::string(name) + "'");
    return it->second;
  }

  std::uint32_t index(std::string_view text, std::uint32_t limit, const char* what) const {
    std::uint64_t v = 0;
    try {
      v = parse_u64(text);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    if (v >= limit) {
      fail(std::string(what) + " index " + std::string(text) + " out of range (count " +
           std::to_string(limit) + ")");
    }
    return static_cast<std::uint32_t>(v);
  }

  void open_block(const std::vector<std::string_view>& tok) {
    close_block();
    const std::string_view kw = tok[0];
    const std::size_t want = (kw == "edges" || kw == "features") ? 2 : 1;
    if (tok.size() != want) fail("malformed block header '" + std::string(kw) + "'");
    if (kw == "vtypes") {
      if (seen_vtypes_) fail("second vtypes block");
      seen_vtypes_ = true;
      block_ = Block::kVtypes;
      return;
    }
    if (!seen_vtypes_) fail("vtypes block must come first");
    if (kw == "relations") {
      if (seen_relations_) fail("second relations block");
      seen_relations_ = true;
      block_ = Block::kRelations;
    } else if (kw == "edges") {
      current_ = relation_ref(tok[1]);
      if (edge_block_line_[current_] != 0) fail("second edges block for '" + std::string(tok[1]) + "'");
      edge_block_line_[current_] = line_;
      block_ = Block::kEdges;
    } else if (kw == "features") {
      current_ = type_ref(tok[1]);
      if (!features_[current_].empty()) {
        fail("second features block for '" + std::string(tok[1]) + "'");
      }
      if (types_[current_].feature_dim == 0) {
        fail("type '" + std::string(tok[1]) + "' has feature_dim 0 and cannot carry features");
      }
      features_[current_] = Matrix(types_[current_].count, types_[current_].feature_dim);
      feature_rows_ = 0;
      block_ = Block::kFeatures;
    } else {
      block_ = Block::kMetapaths;
    }
  }

  void close_block() {
    if (block_ == Block::kFeatures && feature_rows_ != types_[current_].count) {
      fail("features of '" + types_[current_].name + "' have " + std::to_string(feature_rows_) +
           " rows, expected " + std::to_string(types_[current_].count));
    }
    feature_rows_ = 0;
    block_ = Block::kNone;
  }

  void body_line(const std::vector<std::string_view>& tok) {
    switch (block_) {
      case Block::kNone:
        fail("data outside any block");
      case Block::kVtypes: {
        if (tok.size() != 3) fail("expected 'name count feature_dim'");
        VertexType t{std::string(tok[0]), 0, 0};
        if (type_index_.count(t.name)) fail("duplicate vertex type '" + t.name + "'");
        try {
          const std::uint64_t count = parse_u64(tok[1]);
          const std::uint64_t dim = parse_u64(tok[2]);
          if (count == 0 || count > 0xFFFFFFFFull) fail("vertex count must be in [1, 2^32)");
          if (dim > 1u << 20) fail("feature_dim too large");
          t.count = static_cast<std::uint32_t>(count);
          t.feature_dim = static_cast<std::uint32_t>(dim);
        } catch (const std::invalid_argument& e) {
          fail(e.what());
        }
        type_index_.emplace(t.name, static_cast<TypeId>(types_.size()));
        types_.push_back(std::move(t));
        features_.emplace_back();
        return;
      }
      case Block::kRelations: {
        if (tok.size() != 3) fail("expected 'name src_type dst_type'");
        RelationType r{std::string(tok[0]), type_ref(tok[1]), type_ref(tok[2])};
        if (relation_index_.count(r.name)) fail("duplicate relation '" + r.name + "'");
        relation_index_.emplace(r.name, static_cast<RelationId>(relations_.size()));
        relations_.push_back(std::move(r));
        edges_.emplace_back();
        edge_block_line_.push_back(0);
        return;
      }
      case Block::kEdges: {
        if (tok.size() != 2) fail("expected 'src_idx dst_idx'");
        const RelationType& r = relations_[current_];
        const VertexId u = index(tok[0], types_[r.src].count, "source");
        const VertexId v = index(tok[1], types_[r.dst].count, "target");
        edges_[current_].push_back({u, v});
        return;
      }
      case Block::kFeatures: {
        const VertexType& t = types_[current_];
        if (feature_rows_ >= t.count) fail("too many feature rows for '" + t.name + "'");
        if (tok.size() != t.feature_dim) {
          fail("feature row has " + std::to_string(tok.size()) + " values, expected " +
               std::to_string(t.feature_dim));
        }
        auto row = features_[current_].row(feature_rows_);
        for (std::size_t i = 0; i < tok.size(); ++i) {
          try {
            row[i] = parse_double(tok[i]);
          } catch (const std::invalid_argument& e) {
            fail(e.what());
          }
        }
        ++feature_rows_;
        return;
      }
      case Block::kMetapaths: {
        if (tok.size() < 2) fail("expected 'name rel1 [rel2 ...]'");
        MetapathSpec m{std::string(tok[0]), {}};
        for (std::size_t i = 1; i < tok.size(); ++i) m.relations.push_back(relation_ref(tok[i]));
        for (std::size_t i = 1; i < m.relations.size(); ++i) {
          if (relations_[m.relations[i - 1]].dst != relations_[m.relations[i]].src) {
            fail("metapath '" + m.name + "' is not type-compatible at step " + std::to_string(i));
          }
        }
        metapaths_.push_back(std::move(m));
        return;
      }
    }
  }

  std::string source_;
  std::size_t line_ = 0;
  Block block_ = Block::kNone;
  bool seen_vtypes_ = false;
  bool seen_relations_ = false;
  std::uint32_t current_ = 0;
  std::uint32_t feature_rows_ = 0;

  std::vector<VertexType> types_;
  std::vector<RelationType> relations_;
  std::vector<std::vector<Edge>> edges_;
  std::vector<std::size_t> edge_block_line_;
  std::vector<Matrix> features_;
  std::vector<MetapathSpec> metapaths_;
  std::map<std::string, TypeId> type_index_;
  std::map<std::string, RelationId> relation_index_;
};

}  // namespace

HetGraph parse_hetgraph(std::istream& in, const std::string& source) {
  return Parser(source).parse(in);
}

HetGraph load_hetgraph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
  return parse_hetgraph(in, path);
}

std::string serialize_hetgraph(const HetGraph& g) {
  std::string out;
  out += "vtypes\n";
  for (const VertexType& t : g.vertex_types()) {
    out += t.name + ' ' + std::to_string(t.count) + ' ' + std::to_string(t.feature_dim) + '\n';
  }
  out += "relations\n";
  for (const RelationType& r : g.relations()) {
    out += r.name + ' ' + g.vertex_type(r.src).name + ' ' + g.vertex_type(r.dst).name + '\n';
  }
  for (RelationId r = 0; r < g.relations().size(); ++r) {
    out += "edges " + g.relation(r).name + '\n';
    for (const Edge& e : g.adjacency(r).edges()) {
      out += std::to_string(e.src) + ' ' + std::to_string(e.dst) + '\n';
    }
  }
  for (TypeId t = 0; t < g.vertex_types().size(); ++t) {
    if (!g.has_features(t)) continue;
    out += "features " + g.vertex_type(t).name + '\n';
    const Matrix& f = g.raw_features(t);
    for (std::size_t i = 0; i < f.rows(); ++i) {
      auto row = f.row(i);
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (j) out += ' ';
        out += format_double(row[j]);
      }
      out += '\n';
    }
  }
  if (!g.metapaths().empty()) {
    out += "metapaths\n";
    for (const MetapathSpec& m : g.metapaths()) {
      out += m.name;
      for (RelationId r : m.relations) out += ' ' + g.relation(r).name;
      out += '\n';
    }
  }
  return out;
}

void save_hetgraph(const HetGraph& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write graph file '" + path + "'");
  out << serialize_hetgraph(g);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace hihgnn
