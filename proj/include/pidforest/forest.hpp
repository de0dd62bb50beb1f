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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pidforest/core.hpp"

namespace pidforest {

struct HyperParams {
  std::size_t num_trees = 50;
  std::size_t samples_per_tree = 100;
  std::size_t max_degree = 3;  // k < 5 works well in practice
  std::size_t max_depth = 10;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

enum class SplitKind : std::uint8_t {
  kLeaf = 0,
  kContinuous = 1,        // cuts: interior breakpoints in normalized units
  kOrderedRange = 2,      // code_cuts: child i keeps codes <= code_cuts[i]
  kUnorderedSingleton = 3  // code_cuts: {c}; child 0 is {c}, child 1 the rest
};

/// One node of a fitted tree. Children occupy a contiguous index range in
/// the tree's node arena.
struct TreeNode {
  SplitKind kind = SplitKind::kLeaf;
  std::int32_t coord = -1;
  std::vector<double> cuts;
  std::vector<std::uint32_t> code_cuts;
  std::uint32_t first_child = 0;
  std::uint32_t num_children = 0;
  std::uint32_t depth = 0;
  std::uint32_t count = 0;        // sample points that reached the node
  double log2_volume = 0.0;
  double log2_sparsity = 0.0;     // log2(vol) - log2(count); leaves only

  bool is_leaf() const { return kind == SplitKind::kLeaf; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct Forest {
  std::vector<AttributeSpec> columns;  // original-unit column specs
  NormalizationTransform transform;
  HyperParams params;
  std::vector<Tree> trees;
};

/// Fits num_trees partition trees, each on an independent sample of
/// min(samples_per_tree, n) points drawn without replacement. Tree i is
/// seeded from (rng_seed, i), so results do not depend on thread count.
Forest fit(const Dataset& dataset, const HyperParams& params,
           unsigned threads = 1);

enum class ScoreBy : std::uint8_t {
  kSparsity,  // leaf log2 sparsity (the anomaly score)
  kDepth,     // ablation: negated isolation path length, depth + c(count)
};

/// One constrained coordinate of a witness subcube, in original units.
/// Ranges that reach the edge of the training box extend to +-infinity,
/// mirroring where the tree actually routes out-of-range values.
struct WitnessRange {
  std::size_t coord = 0;
  bool categorical = false;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint32_t> codes;
  double log2_length = 0.0;
};

struct ScoreReport {
  double score = 0.0;       // higher = more anomalous
  std::size_t witness_tree = 0;
  std::vector<WitnessRange> ranges;  // most constrained first
};

/// Routes each point down every tree; the score is the 75th percentile
/// (linear interpolation between order statistics) of the per-tree leaf
/// scores. Throws schema_error when the points do not match the forest's
/// columns.
std::vector<double> score(const Forest& forest, const Dataset& points,
                          ScoreBy score_by = ScoreBy::kSparsity);

/// score() plus a witness: the leaf subcube from the tree whose score is the
/// smallest one at or above the percentile (ties to the lowest tree index).
std::vector<ScoreReport> score_with_witness(
    const Forest& forest, const Dataset& points,
    ScoreBy score_by = ScoreBy::kSparsity);

/// Percentile with linear interpolation between order statistics:
/// rank = p * (count - 1) over the sorted values.
double interpolated_percentile(std::vector<double> values, double p);

/// Expected remaining path length for a leaf holding n points (the standard
/// isolation-forest completion term): 0 for n <= 1, 2*H(n-1) - 2(n-1)/n
/// otherwise, with exact harmonic numbers for small n.
double average_path_length(std::uint64_t n);

/// Versioned JSON model document. serialize/deserialize round-trips are
/// lossless: the restored forest scores bit-identically.
std::string serialize(const Forest& forest);
Forest deserialize(std::string_view document);

}  // namespace pidforest
