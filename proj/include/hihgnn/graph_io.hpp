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
 * @file graph_io.hpp
 * @brief Line-oriented text format for heterogeneous graphs.
 *
 * @code
 * # comment
 * vtypes
 * author 2 3
 * paper 1 3
 * relations
 * AP author paper
 * PA paper author
 * edges AP
 * 0 0
 * 1 0
 * features author
 * 0.1 0.2 0.3
 * 0.4 0.5 0.6
 * metapaths
 * APA AP PA
 * @endcode
 *
 * Blocks: `vtypes` (name count feature_dim), `relations` (name src dst),
 * `edges <relation>` (src_idx dst_idx), `features <type>` (one row per
 * vertex), `metapaths` (name rel1 rel2 ...). `vtypes` must come first and
 * `relations` before any block that names a relation. A relation without an
 * edges block has no edges. Duplicate edges are rejected.
 */

#pragma once

#include <iosfwd>
#include <string>

#include "hihgnn/graph.hpp"

namespace hihgnn {

/// Throws ParseError (with line) on malformed input and std::runtime_error
/// when the file cannot be opened.
HetGraph load_hetgraph(const std::string& path);
HetGraph parse_hetgraph(std::istream& in, const std::string& source = "<input>");

/// Canonical text: vtypes, relations, one edges block per relation in
/// declaration order (CSC order), features for every type that has them,
/// then metapaths. Doubles use the shortest round-trip form.
std::string serialize_hetgraph(const HetGraph& g);
void save_hetgraph(const HetGraph& g, const std::string& path);

}  // namespace hihgnn
