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

#include "hihgnn/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

namespace hihgnn {

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kHan: return "HAN";
    case ModelKind::kRgat: return "R-GAT";
    case ModelKind::kRgcn: return "R-GCN";
    case ModelKind::kShgn: return "S-HGN";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != '-' && c != '_') s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  if (s == "HAN") return ModelKind::kHan;
  if (s == "RGAT") return ModelKind::kRgat;
  if (s == "RGCN") return ModelKind::kRgcn;
  if (s == "SHGN") return ModelKind::kShgn;
  throw std::invalid_argument("unsupported model '" + std::string(text) +
                              "' (HAN, R-GAT, R-GCN, S-HGN)");
}

std::uint32_t default_num_layers(ModelKind kind) {
  switch (kind) {
    case ModelKind::kHan: return 1;
    case ModelKind::kRgat: return 3;
    case ModelKind::kRgcn: return 3;
    case ModelKind::kShgn: return 2;
  }
  return 1;
}

ProjectionScope projection_scope(ModelKind kind) {
  return (kind == ModelKind::kRgat || kind == ModelKind::kRgcn) ? ProjectionScope::kPerRelation
                                                                : ProjectionScope::kPerType;
}

bool uses_attention(ModelKind kind) { return kind != ModelKind::kRgcn; }

const Matrix& ModelParams::at(const std::string& key) const {
  auto it = tensors.find(key);
  if (it == tensors.end()) throw std::invalid_argument("missing parameter '" + key + "'");
  return it->second;
}

std::vector<SemanticGraph> select_semantic_graphs(const HetGraph& g, ModelKind kind) {
  std::vector<SemanticGraph> out;
  auto projectable = [&](TypeId t) { return g.vertex_type(t).feature_dim > 0; };
  if (kind == ModelKind::kHan) {
    for (const MetapathSpec& m : g.metapaths()) {
      SemanticGraph sg = build_metapath_graph(g, m);
      if (!projectable(sg.src_type) || !projectable(sg.dst_type)) {
        throw std::invalid_argument("metapath '" + m.name +
                                    "' ends at a type without features; it cannot be projected");
      }
      out.push_back(std::move(sg));
    }
    if (out.empty()) throw std::invalid_argument("HAN needs at least one metapath in the graph");
  } else {
    for (RelationId r = 0; r < g.relations().size(); ++r) {
      const RelationType& rel = g.relation(r);
      if (projectable(rel.src) && projectable(rel.dst)) out.push_back(build_relation_graph(g, r));
    }
    if (out.empty()) {
      throw std::invalid_argument(std::string(model_name(kind)) +
                                  " needs a relation between two types with features");
    }
  }
  return out;
}

std::vector<TypeId> target_types(const std::vector<SemanticGraph>& sgs) {
  std::set<TypeId> s;
  for (const SemanticGraph& sg : sgs) s.insert(sg.dst_type);
  return {s.begin(), s.end()};
}

std::vector<std::vector<std::uint32_t>> layer_input_dims(const HetGraph& g,
                                                         const std::vector<SemanticGraph>& sgs,
                                                         std::uint32_t hidden_dim,
                                                         std::uint32_t num_layers) {
  std::vector<std::vector<std::uint32_t>> dims(num_layers);
  const auto targets = target_types(sgs);
  for (std::uint32_t l = 0; l < num_layers; ++l) {
    for (TypeId t = 0; t < g.vertex_types().size(); ++t) {
      const bool target = std::binary_search(targets.begin(), targets.end(), t);
      dims[l].push_back(l > 0 && target ? hidden_dim : g.vertex_type(t).feature_dim);
    }
  }
  return dims;
}

std::string key_type_weight(std::uint32_t layer, std::string_view type) {
  return "L" + std::to_string(layer) + "/W/type/" + std::string(type);
}
std::string key_rel_weight(std::uint32_t layer, std::string_view relation, std::string_view type) {
  return "L" + std::to_string(layer) + "/W/rel/" + std::string(relation) + "/" + std::string(type);
}
std::string key_self_weight(std::uint32_t layer, std::string_view type) {
  return "L" + std::to_string(layer) + "/W/self/" + std::string(type);
}
std::string key_layer(std::uint32_t layer, std::string_view name) {
  return "L" + std::to_string(layer) + "/" + std::string(name);
}
std::string key_layer(std::uint32_t layer, std::string_view name, std::string_view item) {
  return "L" + std::to_string(layer) + "/" + std::string(name) + "/" + std::string(item);
}

ModelParams generate_params(ModelKind kind, const HetGraph& g,
                            const std::vector<SemanticGraph>& sgs, std::uint64_t seed,
                            std::uint32_t hidden_dim, std::uint32_t num_layers) {
  if (hidden_dim == 0) throw std::invalid_argument("hidden_dim must be positive");
  ModelParams p;
  p.kind = kind;
  p.hidden_dim = hidden_dim;
  p.num_layers = num_layers == 0 ? default_num_layers(kind) : num_layers;
  p.seed = seed;

  auto add = [&](const std::string& key, std::size_t rows, std::size_t cols) {
    if (p.tensors.count(key)) return;
    if (rows == 0 || cols == 0) throw std::invalid_argument("parameter '" + key + "' has a zero dimension");
    Rng rng(derive_seed(seed, key));
    Matrix m(rows, cols);
    for (double& x : m.values()) x = rng.uniform(-0.1, 0.1);
    p.tensors.emplace(key, std::move(m));
  };

  const auto dims = layer_input_dims(g, sgs, hidden_dim, p.num_layers);
  const auto targets = target_types(sgs);
  const std::size_t h = hidden_dim;
  for (std::uint32_t l = 0; l < p.num_layers; ++l) {
    for (const SemanticGraph& sg : sgs) {
      const std::string& src = g.vertex_type(sg.src_type).name;
      const std::string& dst = g.vertex_type(sg.dst_type).name;
      if (projection_scope(kind) == ProjectionScope::kPerType) {
        add(key_type_weight(l, src), h, dims[l][sg.src_type]);
        add(key_type_weight(l, dst), h, dims[l][sg.dst_type]);
      } else {
        add(key_rel_weight(l, sg.id, src), h, dims[l][sg.src_type]);
        if (kind == ModelKind::kRgat) add(key_rel_weight(l, sg.id, dst), h, dims[l][sg.dst_type]);
      }
      if (uses_attention(kind)) {
        add(key_layer(l, "a_src", sg.id), 1, h);
        add(key_layer(l, "a_dst", sg.id), 1, h);
      }
      if (kind == ModelKind::kShgn) {
        if (!sg.relation) throw std::invalid_argument("S-HGN runs on relation graphs only");
        add(key_layer(l, "a_rel", sg.id), 1, h);
        add(key_layer(l, "h_rel", sg.id), 1, h);
        add(key_layer(l, "W_rel", sg.id), h, h);
      }
    }
    if (kind == ModelKind::kHan) {
      add(key_layer(l, "q"), 1, h);
      add(key_layer(l, "W_sem"), h, h);
      add(key_layer(l, "b"), 1, h);
    }
    if (kind == ModelKind::kRgcn) {
      for (TypeId t : targets) add(key_self_weight(l, g.vertex_type(t).name), h, dims[l][t]);
    }
  }
  return p;
}

void write_params(std::ostream& out, const ModelParams& p) {
  out << "model " << model_name(p.kind) << '\n'
      << "hidden_dim " << p.hidden_dim << '\n'
      << "num_layers " << p.num_layers << '\n'
      << "leaky_slope " << format_double(p.leaky_slope) << '\n'
      << "elu_alpha " << format_double(p.elu_alpha) << '\n'
      << "seed " << p.seed << '\n';
  for (const auto& [key, m] : p.tensors) {
    out << "tensor " << key << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
      auto row = m.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out << ' ';
        out << format_double(row[c]);
      }
      out << '\n';
    }
  }
}

ModelParams read_params(std::istream& in, const std::string& source) {
  ModelParams p;
  std::string raw;
  std::size_t line = 0;
  Matrix* current = nullptr;
  std::size_t row = 0;
  auto fail = [&](const std::string& what) { throw ParseError(source, line, what); };
  while (std::getline(in, raw)) {
    ++line;
    auto tok = split_ws(raw);
    if (tok.empty() || tok[0].front() == '#') continue;
    try {
      if (current && row < current->rows()) {
        if (tok.size() != current->cols()) fail("tensor row has wrong width");
        for (std::size_t c = 0; c < tok.size(); ++c) (*current)(row, c) = parse_double(tok[c]);
        ++row;
        continue;
      }
      current = nullptr;
      if (tok[0] == "tensor") {
        if (tok.size() != 4) fail("expected 'tensor key rows cols'");
        const auto rows = parse_u64(tok[2]);
        const auto cols = parse_u64(tok[3]);
        auto [it, fresh] = p.tensors.emplace(std::string(tok[1]), Matrix(rows, cols));
        if (!fresh) fail("duplicate tensor '" + std::string(tok[1]) + "'");
        current = &it->second;
        row = 0;
      } else if (tok.size() != 2) {
        fail("expected 'field value'");
      } else if (tok[0] == "model") {
        p.kind = parse_model_kind(tok[1]);
      } else if (tok[0] == "hidden_dim") {
        p.hidden_dim = static_cast<std::uint32_t>(parse_u64(tok[1]));
      } else if (tok[0] == "num_layers") {
        p.num_layers = static_cast<std::uint32_t>(parse_u64(tok[1]));
      } else if (tok[0] == "leaky_slope") {
        p.leaky_slope = parse_double(tok[1]);
      } else if (tok[0] == "elu_alpha") {
        p.elu_alpha = parse_double(tok[1]);
      } else if (tok[0] == "seed") {
        p.seed = parse_u64(tok[1]);
      } else {
        fail("unknown field '" + std::string(tok[0]) + "'");
      }
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  if (current && row < current->rows()) fail("truncated tensor");
  return p;
}

double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }

double elu(double x, double alpha) { return x > 0.0 ? x : alpha * std::expm1(x); }

double dot(std::span<const double> a, std::span<const double> b) {
  // Four independent partial sums; the grouping is fixed, so results are
  // reproducible across runs.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  const std::size_t n = a.size();
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

double edge_logit(double theta_src, double theta_dst, double extra, double slope) {
  return std::clamp(leaky_relu(theta_src + theta_dst + extra, slope), -kLogitClamp, kLogitClamp);
}

void project_row(const Matrix& w, std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < w.rows(); ++i) out[i] = dot(w.row(i), x);
}

Matrix feature_projection(const Matrix& x, const Matrix& w) {
  if (x.cols() != w.cols()) {
    throw std::invalid_argument("projection shape mismatch: x has " + std::to_string(x.cols()) +
                                " columns, W has " + std::to_string(w.cols()));
  }
  Matrix out(x.rows(), w.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) project_row(w, x.row(r), out.row(r));
  if (!out.all_finite()) throw std::runtime_error("projection produced non-finite values");
  return out;
}

namespace {

std::vector<double> row_dots(const Matrix& hp, const Matrix& a) {
  if (a.rows() != 1 || a.cols() != hp.cols()) {
    throw std::invalid_argument("attention vector width " + std::to_string(a.cols()) +
                                " does not match feature width " + std::to_string(hp.cols()));
  }
  std::vector<double> out(hp.rows());
  for (std::size_t r = 0; r < hp.rows(); ++r) out[r] = dot(hp.row(r), a.row(0));
  return out;
}

void check_rows(const SemanticGraph& sg, const Matrix& hp_src) {
  if (hp_src.rows() != sg.edges.num_src()) {
    throw std::invalid_argument("semantic graph '" + sg.id + "': source features have " +
                                std::to_string(hp_src.rows()) + " rows, expected " +
                                std::to_string(sg.edges.num_src()));
  }
}

}  // namespace

Thetas attention_theta(const Matrix& hp, const Matrix& a_src, const Matrix& a_dst) {
  return {row_dots(hp, a_src), row_dots(hp, a_dst)};
}

Matrix neighbor_aggregation_attn(const SemanticGraph& sg, const Matrix& hp_src,
                                 std::span<const double> theta_src,
                                 std::span<const double> theta_dst, double slope, double elu_alpha,
                                 double extra) {
  check_rows(sg, hp_src);
  if (theta_src.size() != sg.edges.num_src() || theta_dst.size() != sg.edges.num_dst()) {
    throw std::invalid_argument("semantic graph '" + sg.id + "': theta sizes do not match");
  }
  const std::size_t d = hp_src.cols();
  Matrix z(sg.edges.num_dst(), d);
  std::vector<double> logits;
  for (VertexId v : sg.targets) {
    auto nbrs = sg.edges.sources_of(v);
    logits.resize(nbrs.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      logits[k] = edge_logit(theta_src[nbrs[k]], theta_dst[v], extra, slope);
      mx = std::max(mx, logits[k]);
    }
    double denom = 0.0;
    for (double& e : logits) {
      e = std::exp(e - mx);
      denom += e;
    }
    auto out = z.row(v);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const double alpha = logits[k] / denom;
      auto hu = hp_src.row(nbrs[k]);
      for (std::size_t j = 0; j < d; ++j) out[j] += alpha * hu[j];
    }
    for (double& x : out) x = elu(x, elu_alpha);
  }
  return z;
}

Matrix neighbor_aggregation_mean(const SemanticGraph& sg, const Matrix& hp_src) {
  check_rows(sg, hp_src);
  const std::size_t d = hp_src.cols();
  Matrix z(sg.edges.num_dst(), d);
  for (VertexId v : sg.targets) {
    auto nbrs = sg.edges.sources_of(v);
    auto out = z.row(v);
    for (VertexId u : nbrs) {
      auto hu = hp_src.row(u);
      for (std::size_t j = 0; j < d; ++j) out[j] += hu[j];
    }
    const double inv = 1.0 / static_cast<double>(nbrs.size());
    for (double& x : out) x *= inv;
  }
  return z;
}

double relation_logit_term(const Matrix& a_rel, const Matrix& h_rel, const Matrix& w_rel) {
  if (h_rel.rows() != 1 || w_rel.cols() != h_rel.cols() || a_rel.cols() != w_rel.rows()) {
    throw std::invalid_argument("edge-type embedding shapes do not match");
  }
  std::vector<double> t(w_rel.rows());
  project_row(w_rel, h_rel.row(0), t);
  return dot(a_rel.row(0), t);
}

Matrix neighbor_aggregation_shgn(const SemanticGraph& sg, const Matrix& hp_src,
                                 const Matrix& hp_dst, const Matrix& a_src, const Matrix& a_dst,
                                 const Matrix& a_rel, const Matrix& h_rel, const Matrix& w_rel,
                                 double slope, double elu_alpha) {
  const auto ts = row_dots(hp_src, a_src);
  const auto td = row_dots(hp_dst, a_dst);
  return neighbor_aggregation_attn(sg, hp_src, ts, td, slope, elu_alpha,
                                   relation_logit_term(a_rel, h_rel, w_rel));
}

double semantic_score(const Matrix& q, const Matrix& w_sem, const Matrix& b,
                      std::span<const double> z) {
  const std::size_t d = w_sem.rows();
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += q(0, i) * std::tanh(dot(w_sem.row(i), z) + b(0, i));
  return s;
}

HanFusion semantic_fusion_han(std::span<const Matrix> zs,
                              std::span<const std::vector<VertexId>> targets, const Matrix& q,
                              const Matrix& w_sem, const Matrix& b) {
  if (zs.empty()) throw std::invalid_argument("semantic fusion needs at least one graph");
  if (targets.size() != zs.size()) throw std::invalid_argument("one target set per graph required");
  HanFusion f;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (zs[i].rows() != zs[0].rows() || zs[i].cols() != zs[0].cols()) {
      throw std::invalid_argument("semantic fusion inputs differ in shape");
    }
    double acc = 0.0;
    for (VertexId v : targets[i]) acc += semantic_score(q, w_sem, b, zs[i].row(v));
    f.w.push_back(targets[i].empty() ? 0.0 : acc / static_cast<double>(targets[i].size()));
  }
  const double mx = *std::max_element(f.w.begin(), f.w.end());
  double denom = 0.0;
  for (double w : f.w) denom += std::exp(w - mx);
  for (double w : f.w) f.beta.push_back(std::exp(w - mx) / denom);
  f.h = Matrix(zs[0].rows(), zs[0].cols());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    auto src = zs[i].values();
    auto dst = f.h.values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += f.beta[i] * src[k];
  }
  return f;
}

Matrix semantic_fusion_mean(std::span<const Matrix> zs) {
  if (zs.empty()) throw std::invalid_argument("semantic fusion needs at least one graph");
  Matrix h(zs[0].rows(), zs[0].cols());
  for (const Matrix& z : zs) {
    if (z.rows() != h.rows() || z.cols() != h.cols()) {
      throw std::invalid_argument("semantic fusion inputs differ in shape");
    }
    for (std::size_t k = 0; k < h.values().size(); ++k) h.values()[k] += z.values()[k];
  }
  const double inv = 1.0 / static_cast<double>(zs.size());
  for (double& x : h.values()) x *= inv;
  return h;
}

Matrix semantic_fusion_rgcn(std::span<const Matrix> zs, const Matrix& x, const Matrix& w_self) {
  Matrix h = feature_projection(x, w_self);
  for (const Matrix& z : zs) {
    if (z.rows() != h.rows() || z.cols() != h.cols()) {
      throw std::invalid_argument("semantic fusion inputs differ in shape");
    }
    for (std::size_t k = 0; k < h.values().size(); ++k) h.values()[k] += z.values()[k];
  }
  return h;
}

EmbeddingResult run_oracle(const HetGraph& g, const std::vector<SemanticGraph>& sgs,
                           const ModelParams& params) {
  if (sgs.empty()) throw std::invalid_argument("no semantic graphs to run");
  const ModelKind kind = params.kind;
  const std::size_t num_types = g.vertex_types().size();
  const auto targets = target_types(sgs);

  std::vector<const Matrix*> input(num_types, nullptr);
  std::vector<Matrix> owned(num_types);
  for (TypeId t = 0; t < num_types; ++t) {
    if (g.has_features(t)) input[t] = &g.raw_features(t);
  }
  auto features_of = [&](TypeId t) -> const Matrix& {
    if (!input[t]) {
      throw std::invalid_argument("vertex type '" + g.vertex_type(t).name +
                                  "' has no features and cannot be projected");
    }
    return *input[t];
  };

  EmbeddingResult result;
  result.h.resize(num_types);
  for (std::uint32_t l = 0; l < params.num_layers; ++l) {
    std::vector<Matrix> zs(sgs.size());
    std::map<TypeId, Matrix> type_proj;
    auto proj_type = [&](TypeId t) -> const Matrix& {
      auto it = type_proj.find(t);
      if (it == type_proj.end()) {
        it = type_proj
                 .emplace(t, feature_projection(features_of(t),
                                                params.at(key_type_weight(l, g.vertex_type(t).name))))
                 .first;
      }
      return it->second;
    };

    for (std::size_t i = 0; i < sgs.size(); ++i) {
      const SemanticGraph& sg = sgs[i];
      const std::string& src = g.vertex_type(sg.src_type).name;
      const std::string& dst = g.vertex_type(sg.dst_type).name;
      switch (kind) {
        case ModelKind::kHan: {
          const Matrix& hs = proj_type(sg.src_type);
          const Matrix& hd = proj_type(sg.dst_type);
          const auto ts = row_dots(hs, params.at(key_layer(l, "a_src", sg.id)));
          const auto td = row_dots(hd, params.at(key_layer(l, "a_dst", sg.id)));
          zs[i] = neighbor_aggregation_attn(sg, hs, ts, td, params.leaky_slope, params.elu_alpha);
          break;
        }
        case ModelKind::kRgat: {
          const Matrix hs =
              feature_projection(features_of(sg.src_type), params.at(key_rel_weight(l, sg.id, src)));
          const Matrix hd =
              feature_projection(features_of(sg.dst_type), params.at(key_rel_weight(l, sg.id, dst)));
          const auto ts = row_dots(hs, params.at(key_layer(l, "a_src", sg.id)));
          const auto td = row_dots(hd, params.at(key_layer(l, "a_dst", sg.id)));
          zs[i] = neighbor_aggregation_attn(sg, hs, ts, td, params.leaky_slope, params.elu_alpha);
          break;
        }
        case ModelKind::kRgcn: {
          const Matrix hs =
              feature_projection(features_of(sg.src_type), params.at(key_rel_weight(l, sg.id, src)));
          zs[i] = neighbor_aggregation_mean(sg, hs);
          break;
        }
        case ModelKind::kShgn: {
          zs[i] = neighbor_aggregation_shgn(
              sg, proj_type(sg.src_type), proj_type(sg.dst_type),
              params.at(key_layer(l, "a_src", sg.id)), params.at(key_layer(l, "a_dst", sg.id)),
              params.at(key_layer(l, "a_rel", sg.id)), params.at(key_layer(l, "h_rel", sg.id)),
              params.at(key_layer(l, "W_rel", sg.id)), params.leaky_slope, params.elu_alpha);
          break;
        }
      }
    }

    std::vector<double> w(sgs.size(), 0.0);
    std::vector<double> beta(sgs.size(), 1.0);
    std::vector<Matrix> next(num_types);
    for (TypeId t : targets) {
      std::vector<std::size_t> group;
      std::vector<Matrix> gz;
      std::vector<std::vector<VertexId>> gt;
      for (std::size_t i = 0; i < sgs.size(); ++i) {
        if (sgs[i].dst_type != t) continue;
        group.push_back(i);
        gz.push_back(zs[i]);
        gt.push_back(sgs[i].targets);
      }
      switch (kind) {
        case ModelKind::kHan: {
          HanFusion f = semantic_fusion_han(gz, gt, params.at(key_layer(l, "q")),
                                            params.at(key_layer(l, "W_sem")),
                                            params.at(key_layer(l, "b")));
          for (std::size_t k = 0; k < group.size(); ++k) {
            w[group[k]] = f.w[k];
            beta[group[k]] = f.beta[k];
          }
          next[t] = std::move(f.h);
          break;
        }
        case ModelKind::kRgat:
          next[t] = semantic_fusion_mean(gz);
          for (std::size_t i : group) beta[i] = 1.0 / static_cast<double>(group.size());
          break;
        case ModelKind::kRgcn:
          next[t] = semantic_fusion_rgcn(gz, features_of(t),
                                         params.at(key_self_weight(l, g.vertex_type(t).name)));
          break;
        case ModelKind::kShgn: {
          Matrix h(gz[0].rows(), gz[0].cols());
          for (const Matrix& z : gz) {
            for (std::size_t k = 0; k < h.values().size(); ++k) h.values()[k] += z.values()[k];
          }
          next[t] = std::move(h);
          break;
        }
      }
    }
    for (TypeId t : targets) {
      owned[t] = std::move(next[t]);
      input[t] = &owned[t];
    }
    if (l + 1 == params.num_layers) {
      result.z = std::move(zs);
      result.w = std::move(w);
      result.beta = std::move(beta);
    }
  }
  for (TypeId t : targets) result.h[t] = owned[t];
  return result;
}

double compare_embeddings(const EmbeddingResult& got, const EmbeddingResult& want) {
  const double inf = std::numeric_limits<double>::infinity();
  if (got.h.size() != want.h.size() || got.z.size() != want.z.size()) return inf;
  double worst = 0.0;
  auto cmp = [&](const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      worst = inf;
      return;
    }
    worst = std::max(worst, max_relative_error(a.values(), b.values()));
  };
  for (std::size_t t = 0; t < got.h.size(); ++t) cmp(got.h[t], want.h[t]);
  for (std::size_t i = 0; i < got.z.size(); ++i) cmp(got.z[i], want.z[i]);
  return worst;
}

std::string embeddings_csv(const HetGraph& g, const EmbeddingResult& r) {
  std::size_t width = 0;
  for (const Matrix& h : r.h) width = std::max(width, h.cols());
  std::string out = "type,vertex";
  for (std::size_t j = 0; j < width; ++j) out += ",h" + std::to_string(j);
  out += '\n';
  for (TypeId t = 0; t < r.h.size(); ++t) {
    const Matrix& h = r.h[t];
    for (std::size_t v = 0; v < h.rows(); ++v) {
      out += g.vertex_type(t).name + ',' + std::to_string(v);
      for (double x : h.row(v)) out += ',' + format_double(x);
      out += '\n';
    }
  }
  return out;
}

}  // namespace hihgnn
