/*
 * Copyright 2026 The pidforest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <json.hpp>

#include "pidforest/forest.hpp"

namespace pidforest {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "pidforest-model";
constexpr int kVersion = 1;

const char* kind_name(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::kContinuous:
      return "continuous";
    case AttributeKind::kCategoricalOrdered:
      return "categorical_ordered";
    case AttributeKind::kCategoricalUnordered:
      return "categorical_unordered";
  }
  return "continuous";
}

AttributeKind kind_from_name(const std::string& name) {
  if (name == "continuous") return AttributeKind::kContinuous;
  if (name == "categorical_ordered") return AttributeKind::kCategoricalOrdered;
  if (name == "categorical_unordered")
    return AttributeKind::kCategoricalUnordered;
  throw schema_error("unknown column kind '" + name + "'");
}

}  // namespace

std::string serialize(const Forest& forest) {
  json doc;
  doc["format"] = kFormatTag;
  doc["version"] = kVersion;
  doc["params"] = {{"trees", forest.params.num_trees},
                   {"samples", forest.params.samples_per_tree},
                   {"degree", forest.params.max_degree},
                   {"depth", forest.params.max_depth},
                   {"seed", forest.params.rng_seed}};

  json columns = json::array();
  for (std::size_t j = 0; j < forest.columns.size(); ++j) {
    const AttributeSpec& col = forest.columns[j];
    const ColumnTransform& ct = forest.transform.cols[j];
    json jc;
    jc["name"] = col.name;
    jc["kind"] = kind_name(col.kind);
    if (col.is_categorical()) {
      jc["domain_size"] = col.domain_size;
    } else {
      jc["min"] = ct.min;
      jc["span"] = ct.span;
      jc["constant"] = ct.constant;
    }
    columns.push_back(std::move(jc));
  }
  doc["columns"] = std::move(columns);

  json trees = json::array();
  for (const Tree& tree : forest.trees) {
    json nodes = json::array();
    for (const TreeNode& node : tree.nodes) {
      // Compact positional encoding:
      // [kind, coord, depth, count, first_child, num_children,
      //  log2_volume, log2_sparsity, cuts, code_cuts]
      nodes.push_back(json::array({static_cast<int>(node.kind), node.coord,
                                   node.depth, node.count, node.first_child,
                                   node.num_children, node.log2_volume,
                                   node.log2_sparsity, node.cuts,
                                   node.code_cuts}));
    }
    trees.push_back(json{{"nodes", std::move(nodes)}});
  }
  doc["trees"] = std::move(trees);
  return doc.dump(1);
}

Forest deserialize(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw data_error(std::string("malformed model document: ") + e.what());
  }
  try {
    if (!doc.contains("format") || doc["format"] != kFormatTag)
      throw schema_error("not a pidforest model document");
    if (!doc.contains("version") || !doc["version"].is_number_integer() ||
        doc["version"].get<int>() != kVersion)
      throw schema_error("unsupported version");

    Forest forest;
    const json& params = doc.at("params");
    forest.params.num_trees = params.at("trees").get<std::size_t>();
    forest.params.samples_per_tree = params.at("samples").get<std::size_t>();
    forest.params.max_degree = params.at("degree").get<std::size_t>();
    forest.params.max_depth = params.at("depth").get<std::size_t>();
    forest.params.rng_seed = params.at("seed").get<std::uint64_t>();

    for (const json& jc : doc.at("columns")) {
      AttributeSpec col;
      ColumnTransform ct;
      col.name = jc.at("name").get<std::string>();
      col.kind = kind_from_name(jc.at("kind").get<std::string>());
      if (col.is_categorical()) {
        col.domain_size = jc.at("domain_size").get<std::uint32_t>();
        ct.categorical = true;
      } else {
        ct.min = jc.at("min").get<double>();
        ct.span = jc.at("span").get<double>();
        ct.constant = jc.at("constant").get<bool>();
        col.observed_min = ct.min;
        col.observed_max = ct.min + ct.span;
      }
      forest.columns.push_back(std::move(col));
      forest.transform.cols.push_back(ct);
    }

    for (const json& jt : doc.at("trees")) {
      Tree tree;
      for (const json& jn : jt.at("nodes")) {
        if (!jn.is_array() || jn.size() != 10)
          throw data_error("malformed model document: bad node record");
        TreeNode node;
        node.kind = static_cast<SplitKind>(jn[0].get<int>());
        node.coord = jn[1].get<std::int32_t>();
        node.depth = jn[2].get<std::uint32_t>();
        node.count = jn[3].get<std::uint32_t>();
        node.first_child = jn[4].get<std::uint32_t>();
        node.num_children = jn[5].get<std::uint32_t>();
        node.log2_volume = jn[6].get<double>();
        node.log2_sparsity = jn[7].get<double>();
        node.cuts = jn[8].get<std::vector<double>>();
        node.code_cuts = jn[9].get<std::vector<std::uint32_t>>();
        tree.nodes.push_back(std::move(node));
      }
      if (tree.nodes.empty())
        throw data_error("malformed model document: empty tree");
      for (const TreeNode& node : tree.nodes) {
        if (node.is_leaf()) continue;
        if (node.num_children < 2 ||
            node.first_child + node.num_children > tree.nodes.size() ||
            node.coord < 0 ||
            static_cast<std::size_t>(node.coord) >= forest.columns.size())
          throw data_error("malformed model document: bad tree structure");
      }
      forest.trees.push_back(std::move(tree));
    }
    if (forest.trees.size() != forest.params.num_trees)
      throw data_error("malformed model document: tree count mismatch");
    return forest;
  } catch (const json::exception& e) {
    throw data_error(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace pidforest
