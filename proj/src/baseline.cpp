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

#include "pidforest/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pidforest/forest.hpp"  // average_path_length

namespace pidforest {

namespace {

class IsoBuilder {
 public:
  IsoBuilder(const Dataset& data, std::size_t max_depth, Rng& rng)
      : data_(data), max_depth_(max_depth), rng_(rng) {}

  IsoTree build(std::vector<std::uint32_t> sample) {
    tree_.nodes.clear();
    tree_.nodes.emplace_back();
    fill(0, std::move(sample), 0);
    return std::move(tree_);
  }

 private:
  void fill(std::size_t node_idx, std::vector<std::uint32_t> idx,
            std::uint32_t depth) {
    tree_.nodes[node_idx].depth = depth;
    tree_.nodes[node_idx].count = static_cast<std::uint32_t>(idx.size());
    if (idx.size() <= 1 || depth >= max_depth_) return;  // leaf

    // Coordinates with spread in this sample; identical columns cannot host
    // a split.
    std::vector<std::size_t> usable;
    std::vector<std::pair<double, double>> ranges(data_.d);
    for (std::size_t j = 0; j < data_.d; ++j) {
      double lo = data_.at(idx[0], j), hi = lo;
      for (const std::uint32_t i : idx) {
        lo = std::min(lo, data_.at(i, j));
        hi = std::max(hi, data_.at(i, j));
      }
      ranges[j] = {lo, hi};
      if (hi > lo) usable.push_back(j);
    }
    if (usable.empty()) return;

    const std::size_t j = usable[rng_.below(usable.size())];
    const auto [lo, hi] = ranges[j];
    const double threshold = lo + rng_.unit() * (hi - lo);

    std::vector<std::uint32_t> left, right;
    for (const std::uint32_t i : idx)
      (data_.at(i, j) < threshold ? left : right).push_back(i);
    // A threshold equal to lo sends everything right; retry is not worth it,
    // just stay a leaf.
    if (left.empty() || right.empty()) return;

    idx.clear();
    const std::size_t l = tree_.nodes.size();
    tree_.nodes.emplace_back();
    tree_.nodes.emplace_back();
    IsoNode& node = tree_.nodes[node_idx];
    node.coord = static_cast<std::int32_t>(j);
    node.threshold = threshold;
    node.left = static_cast<std::uint32_t>(l);
    node.right = static_cast<std::uint32_t>(l + 1);
    fill(l, std::move(left), depth + 1);
    fill(l + 1, std::move(right), depth + 1);
  }

  const Dataset& data_;
  const std::size_t max_depth_;
  Rng& rng_;
  IsoTree tree_;
};

}  // namespace

IsoForest iforest_fit(const Dataset& dataset, std::size_t num_trees,
                      std::size_t samples_per_tree, std::uint64_t seed) {
  if (dataset.n == 0) throw data_error("empty input");
  if (num_trees < 1) throw std::invalid_argument("num_trees must be >= 1");
  if (samples_per_tree < 1)
    throw std::invalid_argument("samples_per_tree must be >= 1");

  IsoForest forest;
  forest.sample_size = std::min(samples_per_tree, dataset.n);
  forest.dims = dataset.d;
  const std::size_t max_depth = forest.sample_size <= 1
      ? 0
      : static_cast<std::size_t>(
            std::ceil(std::log2(static_cast<double>(forest.sample_size))));
  forest.trees.reserve(num_trees);
  for (std::size_t t = 0; t < num_trees; ++t) {
    Rng rng = Rng::derive(seed, t);
    std::vector<std::uint32_t> idx(dataset.n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::size_t i = 0; i < forest.sample_size; ++i) {
      const std::size_t pick = i + rng.below(dataset.n - i);
      std::swap(idx[i], idx[pick]);
    }
    idx.resize(forest.sample_size);
    IsoBuilder builder(dataset, max_depth, rng);
    forest.trees.push_back(builder.build(std::move(idx)));
  }
  return forest;
}

std::vector<double> iforest_score(const IsoForest& forest,
                                  const Dataset& points) {
  if (points.d != forest.dims)
    throw schema_error("column count does not match model");
  const double norm = average_path_length(forest.sample_size);
  std::vector<double> out(points.n);
  for (std::size_t i = 0; i < points.n; ++i) {
    double total = 0.0;
    for (const IsoTree& tree : forest.trees) {
      std::size_t at = 0;
      while (!tree.nodes[at].is_leaf()) {
        const IsoNode& node = tree.nodes[at];
        at = points.at(i, static_cast<std::size_t>(node.coord)) <
                     node.threshold
                 ? node.left
                 : node.right;
      }
      const IsoNode& leaf = tree.nodes[at];
      total += static_cast<double>(leaf.depth) +
               average_path_length(leaf.count);
    }
    const double mean_path = total / static_cast<double>(forest.trees.size());
    out[i] = norm > 0.0 ? std::exp2(-mean_path / norm) : 1.0;
  }
  return out;
}

}  // namespace pidforest
