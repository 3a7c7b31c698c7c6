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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hihgnn/graph.hpp"

namespace hihgnn {

struct SyntheticRelation {
  std::string name;
  std::string src;
  std::string dst;
  // Exactly one of density / edges / reverse_of is set.
  std::optional<double> density;       // fraction of all src x dst pairs, in (0, 1]
  std::optional<std::uint64_t> edges;  // exact edge count
  std::optional<std::string> reverse_of;
};

struct SyntheticMetapath {
  std::string name;
  std::vector<std::string> relations;
};

struct SyntheticSpec {
  std::vector<VertexType> types;
  std::vector<SyntheticRelation> relations;
  std::vector<SyntheticMetapath> metapaths;
  std::uint64_t seed = 0;
};

/// Edges are sampled uniformly without replacement; raw features are drawn
/// uniform in [-1, 1] for every type with a feature width. Same spec, same
/// graph. Throws std::invalid_argument on impossible densities or counts.
HetGraph gen_synthetic(const SyntheticSpec& spec);

/// Shapes of the three public datasets (IMDB, ACM, DBLP). `scale` multiplies
/// vertex and edge counts (average degree is kept, up to saturation of a
/// relation at one edge per vertex pair), feature widths are kept.
/// Metapaths: IMDB {MDM, MAM, MKM}, ACM {PPSP, PSP, PPAP, PAP},
/// DBLP {APA, APTPA, APVPA}.
SyntheticSpec dataset_preset(const std::string& name, double scale, std::uint64_t seed);

/// Ring of `num_graphs` vertex types; relation i connects type i to type
/// i+1 (mod n). Each relation is also declared as a one-step metapath, so
/// every model sees one semantic graph per relation. Neighboring relations
/// share a type, which makes visit order matter for buffer reuse.
SyntheticSpec ring_preset(std::uint32_t num_graphs, std::uint32_t vertices_per_type,
                          std::uint32_t feature_dim, double avg_degree, std::uint64_t seed);

}  // namespace hihgnn
