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
#include <vector>

#include "pidforest/core.hpp"

namespace pidforest {

/// Isolation-forest node: a uniformly random threshold on a uniformly random
/// coordinate. Leaves keep their sample size for path-length completion.
struct IsoNode {
  std::int32_t coord = -1;  // -1: leaf
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t count = 0;
  std::uint32_t depth = 0;

  bool is_leaf() const { return coord < 0; }
};

struct IsoTree {
  std::vector<IsoNode> nodes;
};

struct IsoForest {
  std::vector<IsoTree> trees;
  std::size_t sample_size = 0;  // min(m, n) actually used
  std::size_t dims = 0;
};

/// t random trees, each on a sample of min(m, n) points drawn without
/// replacement. Trees grow to depth ceil(log2(sample)).
IsoForest iforest_fit(const Dataset& dataset, std::size_t num_trees,
                      std::size_t samples_per_tree, std::uint64_t seed);

/// Standard path-length score 2^(-E[depth] / c(sample)), in (0, 1];
/// higher = more anomalous.
std::vector<double> iforest_score(const IsoForest& forest,
                                  const Dataset& points);

}  // namespace pidforest
