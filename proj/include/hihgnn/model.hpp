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
 * @file model.hpp
 * @brief HAN, R-GAT, R-GCN and S-HGN inference math and the sequential
 *        reference pipeline (project everything, aggregate every semantic
 *        graph, fuse per target vertex).
 *
 * Conventions: feature rows are row vectors, so projection is h' = x W^T
 * with W of shape hidden x in_dim. Parameter keys (layer l, 0-based):
 *
 *   L{l}/W/type/{T}        HAN, S-HGN projection per vertex type
 *   L{l}/W/rel/{R}/{T}     R-GAT, R-GCN projection per relation endpoint type
 *   L{l}/W/self/{T}        R-GCN self term per target type
 *   L{l}/a_src/{G}, L{l}/a_dst/{G}   attention halves per semantic graph
 *   L{l}/a_rel/{G}         S-HGN edge-type attention part
 *   L{l}/h_rel/{R}, L{l}/W_rel/{R}   S-HGN edge-type embedding and transform
 *   L{l}/q, L{l}/W_sem, L{l}/b       HAN semantic attention
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hihgnn/common.hpp"
#include "hihgnn/graph.hpp"

namespace hihgnn {

enum class ModelKind { kHan, kRgat, kRgcn, kShgn };

std::string_view model_name(ModelKind kind);
/// Accepts HAN, R-GAT, R-GCN, S-HGN (case-insensitive, '-' optional).
ModelKind parse_model_kind(std::string_view text);
std::uint32_t default_num_layers(ModelKind kind);

/// Projection reuse scope: type-keyed W is shared by every semantic graph,
/// relation-keyed W only within one relation.
enum class ProjectionScope { kPerType, kPerRelation };
ProjectionScope projection_scope(ModelKind kind);

bool uses_attention(ModelKind kind);

inline constexpr double kLogitClamp = 60.0;

struct ModelParams {
  ModelKind kind = ModelKind::kHan;
  std::uint32_t hidden_dim = 64;
  std::uint32_t num_layers = 1;
  double leaky_slope = 0.01;
  double elu_alpha = 1.0;
  std::uint64_t seed = 0;
  std::map<std::string, Matrix> tensors;

  /// Throws std::invalid_argument naming the key when absent.
  const Matrix& at(const std::string& key) const;
  bool has(const std::string& key) const { return tensors.count(key) != 0; }
};

/// Semantic graphs a model runs on: HAN uses the graph's metapaths, the
/// relation-based models use every relation whose endpoint types both carry
/// features. Throws when the selection is empty.
std::vector<SemanticGraph> select_semantic_graphs(const HetGraph& g, ModelKind kind);

/// Types that receive an embedding (destination types of the graphs).
std::vector<TypeId> target_types(const std::vector<SemanticGraph>& sgs);

/// Input width of every type at every layer: raw width at layer 0, hidden
/// width afterwards for target types, raw width for the rest.
std::vector<std::vector<std::uint32_t>> layer_input_dims(const HetGraph& g,
                                                         const std::vector<SemanticGraph>& sgs,
                                                         std::uint32_t hidden_dim,
                                                         std::uint32_t num_layers);

std::string key_type_weight(std::uint32_t layer, std::string_view type);
std::string key_rel_weight(std::uint32_t layer, std::string_view relation, std::string_view type);
std::string key_self_weight(std::uint32_t layer, std::string_view type);
std::string key_layer(std::uint32_t layer, std::string_view name);
std::string key_layer(std::uint32_t layer, std::string_view name, std::string_view item);

/// Uniform [-0.1, 0.1] tensors, each seeded from (seed, key). num_layers 0
/// selects the model's default depth.
ModelParams generate_params(ModelKind kind, const HetGraph& g,
                            const std::vector<SemanticGraph>& sgs, std::uint64_t seed,
                            std::uint32_t hidden_dim = 64, std::uint32_t num_layers = 0);

void write_params(std::ostream& out, const ModelParams& p);
ModelParams read_params(std::istream& in, const std::string& source = "<params>");

// ---- elementwise helpers ------------------------------------------------

double leaky_relu(double x, double slope);
double elu(double x, double alpha);
double dot(std::span<const double> a, std::span<const double> b);
/// Logit of one edge: clamp(LeakyReLU(theta_src + theta_dst + extra)).
double edge_logit(double theta_src, double theta_dst, double extra, double slope);

/// out = W x (W: rows x cols, x: cols).
void project_row(const Matrix& w, std::span<const double> x, std::span<double> out);

// ---- stage operations ---------------------------------------------------

/// h' = x W^T. Throws on shape mismatch or non-finite output.
Matrix feature_projection(const Matrix& x, const Matrix& w);

struct Thetas {
  std::vector<double> src;  // a_src . h'_u for every row
  std::vector<double> dst;  // a_dst . h'_v for every row
};
Thetas attention_theta(const Matrix& hp, const Matrix& a_src, const Matrix& a_dst);

/// Softmax attention aggregation, z_v = ELU(sum alpha_uv h'_u). `extra` is
/// added to every logit (the S-HGN edge-type term; 0 otherwise). Rows of
/// targets without in-edges are zero.
Matrix neighbor_aggregation_attn(const SemanticGraph& sg, const Matrix& hp_src,
                                 std::span<const double> theta_src,
                                 std::span<const double> theta_dst, double slope, double elu_alpha,
                                 double extra = 0.0);

/// z_v = mean of h'_u over in-neighbors, no activation.
Matrix neighbor_aggregation_mean(const SemanticGraph& sg, const Matrix& hp_src);

/// Scalar edge-type logit term a_rel . (W_r h_r).
double relation_logit_term(const Matrix& a_rel, const Matrix& h_rel, const Matrix& w_rel);

Matrix neighbor_aggregation_shgn(const SemanticGraph& sg, const Matrix& hp_src,
                                 const Matrix& hp_dst, const Matrix& a_src, const Matrix& a_dst,
                                 const Matrix& a_rel, const Matrix& h_rel, const Matrix& w_rel,
                                 double slope, double elu_alpha);

/// Importance contribution of one vertex, q . tanh(W_sem z + b).
double semantic_score(const Matrix& q, const Matrix& w_sem, const Matrix& b,
                      std::span<const double> z);

struct HanFusion {
  Matrix h;
  std::vector<double> w;
  std::vector<double> beta;
};
/// w_P averaged over each graph's targets (0 for a graph without targets),
/// beta = softmax(w), h = sum beta_P z^P.
HanFusion semantic_fusion_han(std::span<const Matrix> zs,
                              std::span<const std::vector<VertexId>> targets, const Matrix& q,
                              const Matrix& w_sem, const Matrix& b);
Matrix semantic_fusion_mean(std::span<const Matrix> zs);
/// sum of zs plus x W_self^T.
Matrix semantic_fusion_rgcn(std::span<const Matrix> zs, const Matrix& x, const Matrix& w_self);

// ---- reference pipeline ------------------------------------------------

struct EmbeddingResult {
  std::vector<Matrix> h;     // per vertex type; empty for non-target types
  std::vector<Matrix> z;     // per semantic graph, last layer, rows = dst count
  std::vector<double> w;     // per semantic graph, last layer (HAN; 0 otherwise)
  std::vector<double> beta;  // per semantic graph, last layer fusion weight
};

EmbeddingResult run_oracle(const HetGraph& g, const std::vector<SemanticGraph>& sgs,
                           const ModelParams& params);

/// Largest element-wise relative error over h and z (see max_relative_error).
double compare_embeddings(const EmbeddingResult& got, const EmbeddingResult& want);

/// One row per vertex of every target type: type,vertex,h0..h{d-1}.
std::string embeddings_csv(const HetGraph& g, const EmbeddingResult& r);

}  // namespace hihgnn
