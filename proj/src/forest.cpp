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

#include "pidforest/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "pidforest/split.hpp"

namespace pidforest {

void HyperParams::validate() const {
  if (num_trees < 1) throw std::invalid_argument("num_trees must be >= 1");
  if (samples_per_tree < 2)
    throw std::invalid_argument("samples_per_tree must be >= 2");
  if (max_degree < 2 || max_degree > 16)
    throw std::invalid_argument("max_degree must be in [2, 16]");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
}

double average_path_length(std::uint64_t n) {
  if (n <= 1) return 0.0;
  const std::uint64_t k = n - 1;
  double harmonic;
  if (k <= 256) {
    harmonic = 0.0;
    for (std::uint64_t i = 1; i <= k; ++i)
      harmonic += 1.0 / static_cast<double>(i);
  } else {
    const double kd = static_cast<double>(k);
    harmonic = std::log(kd) + 0.57721566490153286 + 1.0 / (2.0 * kd) -
               1.0 / (12.0 * kd * kd);
  }
  return 2.0 * harmonic -
         2.0 * static_cast<double>(n - 1) / static_cast<double>(n);
}

double interpolated_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of empty set");
  std::sort(values.begin(), values.end());
  const double rank = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

namespace {

// Per-coordinate interval of the node being built or routed through.
struct Bound {
  double lo = 0.0, hi = 1.0;            // continuous
  std::uint32_t clo = 0, chi = 0;       // ordered categorical, inclusive
  std::vector<std::uint32_t> codes;     // unordered categorical, sorted
};

std::vector<Bound> full_bounds(const std::vector<AttributeSpec>& columns) {
  std::vector<Bound> bounds(columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const AttributeSpec& col = columns[j];
    if (col.kind == AttributeKind::kCategoricalOrdered) {
      bounds[j].chi = col.domain_size - 1;
    } else if (col.kind == AttributeKind::kCategoricalUnordered) {
      bounds[j].codes.resize(col.domain_size);
      std::iota(bounds[j].codes.begin(), bounds[j].codes.end(), 0u);
    }
  }
  return bounds;
}

double bound_log2_length(const AttributeSpec& col, const Bound& b) {
  switch (col.kind) {
    case AttributeKind::kContinuous:
      return std::log2(b.hi - b.lo);
    case AttributeKind::kCategoricalOrdered:
      return std::log2(static_cast<double>(b.chi - b.clo + 1) /
                       static_cast<double>(col.domain_size));
    case AttributeKind::kCategoricalUnordered:
      return std::log2(static_cast<double>(b.codes.size()) /
                       static_cast<double>(col.domain_size));
  }
  return 0.0;
}

// Child selection shared by fitting and scoring. `value` is the normalized
// coordinate value (continuous) or the raw code (categorical).
std::size_t route_child(const TreeNode& node, double value) {
  switch (node.kind) {
    case SplitKind::kContinuous: {
      std::size_t i = 0;
      while (i < node.cuts.size() && value >= node.cuts[i]) ++i;
      return i;
    }
    case SplitKind::kOrderedRange: {
      const auto code = static_cast<std::uint32_t>(value);
      std::size_t i = 0;
      while (i < node.code_cuts.size() && code > node.code_cuts[i]) ++i;
      return i;
    }
    case SplitKind::kUnorderedSingleton:
      return static_cast<std::uint32_t>(value) == node.code_cuts[0] ? 0 : 1;
    case SplitKind::kLeaf:
      break;
  }
  throw std::logic_error("routing through a leaf");
}

// Restricts `bound` to the numbered child of `node`.
void refine_bound(const TreeNode& node, std::size_t child, Bound& bound) {
  switch (node.kind) {
    case SplitKind::kContinuous:
      if (child > 0) bound.lo = node.cuts[child - 1];
      if (child < node.cuts.size()) bound.hi = node.cuts[child];
      break;
    case SplitKind::kOrderedRange:
      if (child > 0) bound.clo = node.code_cuts[child - 1] + 1;
      if (child < node.code_cuts.size()) bound.chi = node.code_cuts[child];
      break;
    case SplitKind::kUnorderedSingleton:
      if (child == 0) {
        bound.codes = {node.code_cuts[0]};
      } else {
        std::erase(bound.codes, node.code_cuts[0]);
      }
      break;
    case SplitKind::kLeaf:
      break;
  }
}

struct SplitChoice {
  double variance = -1.0;
  std::int32_t coord = -1;
  SplitKind kind = SplitKind::kLeaf;
  std::vector<double> cuts;
  std::vector<std::uint32_t> code_cuts;
  std::size_t groups = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const std::vector<bool>& splittable,
              const HyperParams& params)
      : data_(data), splittable_(splittable), params_(params) {}

  Tree build(std::vector<std::uint32_t> sample) {
    bounds_ = full_bounds(data_.columns);
    log2_vol_ = 0.0;
    tree_.nodes.clear();
    tree_.nodes.emplace_back();
    fill(0, std::move(sample), 0);
    return std::move(tree_);
  }

 private:
  void fill(std::size_t node_idx, std::vector<std::uint32_t> idx,
            std::uint32_t depth) {
    {
      TreeNode& node = tree_.nodes[node_idx];
      node.depth = depth;
      node.count = static_cast<std::uint32_t>(idx.size());
      node.log2_volume = log2_vol_;
    }
    SplitChoice choice;
    bool split_ok = false;
    std::vector<std::vector<std::uint32_t>> groups;
    if (idx.size() > 1 && depth <= params_.max_depth) {
      choice = choose_split(idx);
      if (choice.coord >= 0 && choice.variance > kVarianceTol) {
        TreeNode stub;
        stub.kind = choice.kind;
        stub.coord = choice.coord;
        stub.cuts = choice.cuts;
        stub.code_cuts = choice.code_cuts;
        groups.assign(choice.groups, {});
        for (const std::uint32_t i : idx) {
          const double v = data_.at(i, static_cast<std::size_t>(choice.coord));
          groups[route_child(stub, v)].push_back(i);
        }
        // The solver produces nonempty cells; an empty group can only arise
        // from a midpoint colliding with a data value at float precision.
        split_ok = std::none_of(groups.begin(), groups.end(),
                                [](const auto& g) { return g.empty(); });
      }
    }
    if (!split_ok) {
      TreeNode& node = tree_.nodes[node_idx];
      node.kind = SplitKind::kLeaf;
      node.log2_sparsity =
          log2_vol_ - std::log2(static_cast<double>(idx.size()));
      return;
    }
    {
      TreeNode& node = tree_.nodes[node_idx];
      node.kind = choice.kind;
      node.coord = choice.coord;
      node.cuts = choice.cuts;
      node.code_cuts = choice.code_cuts;
      node.first_child = static_cast<std::uint32_t>(tree_.nodes.size());
      node.num_children = static_cast<std::uint32_t>(choice.groups);
    }
    idx.clear();
    idx.shrink_to_fit();

    const std::size_t first_child = tree_.nodes.size();
    tree_.nodes.resize(first_child + choice.groups);

    const auto coord = static_cast<std::size_t>(choice.coord);
    const Bound saved = bounds_[coord];
    const double saved_vol = log2_vol_;
    const double parent_len = bound_log2_length(data_.columns[coord], saved);
    for (std::size_t c = 0; c < choice.groups; ++c) {
      bounds_[coord] = saved;
      refine_bound(tree_.nodes[node_idx], c, bounds_[coord]);
      log2_vol_ = saved_vol - parent_len +
                  bound_log2_length(data_.columns[coord], bounds_[coord]);
      fill(first_child + c, std::move(groups[c]), depth + 1);
    }
    bounds_[coord] = saved;
    log2_vol_ = saved_vol;
  }

  SplitChoice choose_split(const std::vector<std::uint32_t>& idx) {
    SplitChoice best;
    for (std::size_t j = 0; j < data_.d; ++j) {
      if (!splittable_[j]) continue;
      SplitChoice cand;
      switch (data_.columns[j].kind) {
        case AttributeKind::kContinuous:
          cand = continuous_candidate(idx, j);
          break;
        case AttributeKind::kCategoricalOrdered:
          cand = ordered_candidate(idx, j);
          break;
        case AttributeKind::kCategoricalUnordered:
          cand = unordered_candidate(idx, j);
          break;
      }
      if (cand.coord >= 0 && cand.variance > best.variance) best = std::move(cand);
    }
    return best;
  }

  SplitChoice continuous_candidate(const std::vector<std::uint32_t>& idx,
                                   std::size_t j) {
    std::vector<double> vals;
    vals.reserve(idx.size());
    for (const std::uint32_t i : idx) vals.push_back(data_.at(i, j));
    std::sort(vals.begin(), vals.end());
    const auto cand = best_continuous_split(vals, bounds_[j].lo, bounds_[j].hi,
                                            params_.max_degree);
    if (!cand) return {};
    SplitChoice out;
    out.variance = cand->variance;
    out.coord = static_cast<std::int32_t>(j);
    out.kind = SplitKind::kContinuous;
    out.cuts = cand->breakpoints;
    out.groups = cand->breakpoints.size() + 1;
    return out;
  }

  SplitChoice ordered_candidate(const std::vector<std::uint32_t>& idx,
                                std::size_t j) {
    // Distinct codes in the node's range become histogram cells whose length
    // counts the codes they absorb; cell boundaries sit midway between
    // consecutive present codes.
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const std::uint32_t i : idx)
      ++counts[static_cast<std::uint32_t>(data_.at(i, j))];
    if (counts.size() < 2) return {};
    const Bound& b = bounds_[j];
    const std::size_t m = counts.size();
    std::vector<std::uint32_t> present;
    std::vector<std::uint32_t> weights;
    present.reserve(m);
    for (const auto& [code, cnt] : counts) {
      present.push_back(code);
      weights.push_back(cnt);
    }
    std::vector<std::uint32_t> cell_hi(m);
    for (std::size_t i = 0; i + 1 < m; ++i)
      cell_hi[i] = (present[i] + present[i + 1]) / 2;
    cell_hi[m - 1] = b.chi;

    GapArray gap;
    gap.weights = weights;
    gap.f.resize(m);
    const double total = static_cast<double>(b.chi - b.clo + 1);
    std::uint32_t cell_lo = b.clo;
    for (std::size_t i = 0; i < m; ++i) {
      gap.f[i] = static_cast<double>(cell_hi[i] - cell_lo + 1) / total;
      cell_lo = cell_hi[i] + 1;
    }
    const std::size_t k = std::min(params_.max_degree, m);
    const HistogramPartition part = ksplit_approx(gap, k);
    SplitChoice out;
    out.variance = variance_of_partition(gap, part);
    out.coord = static_cast<std::int32_t>(j);
    out.kind = SplitKind::kOrderedRange;
    out.code_cuts.reserve(part.boundaries.size());
    for (const std::size_t cut : part.boundaries)
      out.code_cuts.push_back(cell_hi[cut - 1]);
    out.groups = part.cells();
    return out;
  }

  SplitChoice unordered_candidate(const std::vector<std::uint32_t>& idx,
                                  std::size_t j) {
    // Singleton-versus-complement grouping: try each present code as the
    // carved-out cell.
    std::map<std::uint32_t, std::uint32_t> counts;
    for (const std::uint32_t i : idx)
      ++counts[static_cast<std::uint32_t>(data_.at(i, j))];
    if (counts.size() < 2) return {};
    const double subset = static_cast<double>(bounds_[j].codes.size());
    const double total = static_cast<double>(idx.size());
    const double p1 = 1.0 / subset;
    const double p2 = 1.0 - p1;
    SplitChoice out;
    for (const auto& [code, cnt] : counts) {
      const double q1 = static_cast<double>(cnt) / total;
      const double q2 = 1.0 - q1;
      const double var = p1 * p1 / q1 + p2 * p2 / q2 - 1.0;
      if (var > out.variance) {
        out.variance = var;
        out.code_cuts = {code};
      }
    }
    out.coord = static_cast<std::int32_t>(j);
    out.kind = SplitKind::kUnorderedSingleton;
    out.groups = 2;
    return out;
  }

  const Dataset& data_;
  const std::vector<bool>& splittable_;
  const HyperParams& params_;
  Tree tree_;
  std::vector<Bound> bounds_;
  double log2_vol_ = 0.0;
};

std::vector<std::uint32_t> sample_without_replacement(std::size_t n,
                                                      std::size_t m, Rng& rng) {
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t pick = i + rng.below(n - i);
    std::swap(idx[i], idx[pick]);
  }
  idx.resize(m);
  return idx;
}

void check_schema(const Forest& forest, const Dataset& points) {
  if (points.d != forest.columns.size())
    throw schema_error("column count does not match model");
  for (std::size_t j = 0; j < points.d; ++j) {
    const AttributeSpec& want = forest.columns[j];
    const AttributeSpec& got = points.columns[j];
    if (want.kind != got.kind)
      throw schema_error("column " + std::to_string(j) + " kind mismatch");
    if (want.is_categorical() && want.domain_size != got.domain_size)
      throw schema_error("column " + std::to_string(j) + " domain mismatch");
    if (!want.name.empty() && !got.name.empty() && want.name != got.name)
      throw schema_error("column " + std::to_string(j) + " name mismatch: '" +
                         got.name + "' vs '" + want.name + "'");
  }
}

// Normalized (and clipped) coordinates of one row.
void normalized_row(const Forest& forest, const Dataset& points,
                    std::size_t row, std::vector<double>& out) {
  out.resize(points.d);
  for (std::size_t j = 0; j < points.d; ++j) {
    const double raw = points.at(row, j);
    if (forest.columns[j].is_categorical()) {
      if (raw < 0.0 || raw != std::floor(raw) ||
          raw >= static_cast<double>(forest.columns[j].domain_size))
        throw schema_error("row " + std::to_string(row) + ", column " +
                           std::to_string(j) + ": code outside model domain");
      out[j] = raw;
    } else {
      out[j] = forest.transform.cols[j].to_unit(raw);
    }
  }
}

std::size_t route_to_leaf(const Tree& tree, std::span<const double> point) {
  std::size_t at = 0;
  while (!tree.nodes[at].is_leaf()) {
    const TreeNode& node = tree.nodes[at];
    const std::size_t child =
        route_child(node, point[static_cast<std::size_t>(node.coord)]);
    at = node.first_child + child;
  }
  return at;
}

double leaf_score(const TreeNode& leaf, ScoreBy score_by) {
  if (score_by == ScoreBy::kSparsity) return leaf.log2_sparsity;
  return -(static_cast<double>(leaf.depth) + average_path_length(leaf.count));
}

}  // namespace

Forest fit(const Dataset& dataset, const HyperParams& params,
           unsigned threads) {
  params.validate();
  validate_dataset(dataset);

  auto [norm, transform] = normalize(dataset);

  std::vector<bool> splittable(norm.d, false);
  bool any = false;
  for (std::size_t j = 0; j < norm.d; ++j) {
    if (norm.columns[j].is_categorical()) {
      // Usable when at least two codes occur somewhere in the data.
      const double first = norm.at(0, j);
      bool varied = false;
      for (std::size_t i = 1; i < norm.n && !varied; ++i)
        varied = norm.at(i, j) != first;
      splittable[j] = norm.columns[j].domain_size >= 2 && varied;
    } else {
      splittable[j] = !transform.cols[j].constant;
    }
    any = any || splittable[j];
  }
  if (!any && norm.n > 1) throw data_error("no usable attributes");

  Forest forest;
  forest.columns = dataset.columns;
  forest.transform = transform;
  forest.params = params;
  forest.trees.resize(params.num_trees);

  const std::size_t sample_size = std::min(params.samples_per_tree, norm.n);
  const Dataset& data = norm;
  auto build_one = [&](std::size_t t) {
    Rng rng = Rng::derive(params.rng_seed, t);
    auto sample = sample_without_replacement(data.n, sample_size, rng);
    TreeBuilder builder(data, splittable, params);
    forest.trees[t] = builder.build(std::move(sample));
  };

  if (threads <= 1 || params.num_trees == 1) {
    for (std::size_t t = 0; t < params.num_trees; ++t) build_one(t);
  } else {
    std::atomic<std::size_t> next{0};
    const unsigned workers =
        std::min<unsigned>(threads, static_cast<unsigned>(params.num_trees));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t t = next.fetch_add(1);
          if (t >= params.num_trees) return;
          build_one(t);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return forest;
}

std::vector<double> score(const Forest& forest, const Dataset& points,
                          ScoreBy score_by) {
  check_schema(forest, points);
  std::vector<double> out(points.n);
  std::vector<double> pt;
  std::vector<double> per_tree(forest.trees.size());
  for (std::size_t i = 0; i < points.n; ++i) {
    normalized_row(forest, points, i, pt);
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
      const std::size_t leaf = route_to_leaf(forest.trees[t], pt);
      per_tree[t] = leaf_score(forest.trees[t].nodes[leaf], score_by);
    }
    out[i] = interpolated_percentile(per_tree, 0.75);
  }
  return out;
}

std::vector<ScoreReport> score_with_witness(const Forest& forest,
                                            const Dataset& points,
                                            ScoreBy score_by) {
  check_schema(forest, points);
  std::vector<ScoreReport> out(points.n);
  std::vector<double> pt;
  std::vector<double> per_tree(forest.trees.size());
  for (std::size_t i = 0; i < points.n; ++i) {
    normalized_row(forest, points, i, pt);
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
      const std::size_t leaf = route_to_leaf(forest.trees[t], pt);
      per_tree[t] = leaf_score(forest.trees[t].nodes[leaf], score_by);
    }
    ScoreReport& report = out[i];
    report.score = interpolated_percentile(per_tree, 0.75);

    // Witness tree: smallest per-tree score at or above the percentile.
    std::size_t pick = 0;
    bool found = false;
    for (std::size_t t = 0; t < per_tree.size(); ++t) {
      if (per_tree[t] < report.score) continue;
      if (!found || per_tree[t] < per_tree[pick]) {
        pick = t;
        found = true;
      }
    }
    report.witness_tree = pick;

    // Re-route through the chosen tree, tracking interval refinements.
    const Tree& tree = forest.trees[pick];
    std::vector<Bound> bounds = full_bounds(forest.columns);
    std::size_t at = 0;
    while (!tree.nodes[at].is_leaf()) {
      const TreeNode& node = tree.nodes[at];
      const auto coord = static_cast<std::size_t>(node.coord);
      const std::size_t child = route_child(node, pt[coord]);
      refine_bound(node, child, bounds[coord]);
      at = node.first_child + child;
    }
    for (std::size_t j = 0; j < forest.columns.size(); ++j) {
      const double ll = bound_log2_length(forest.columns[j], bounds[j]);
      if (ll >= 0.0) continue;  // unconstrained coordinate
      WitnessRange range;
      range.coord = j;
      range.log2_length = ll;
      if (forest.columns[j].is_categorical()) {
        range.categorical = true;
        if (forest.columns[j].kind == AttributeKind::kCategoricalOrdered) {
          for (std::uint32_t c = bounds[j].clo; c <= bounds[j].chi; ++c)
            range.codes.push_back(c);
        } else {
          range.codes = bounds[j].codes;
        }
        range.lo = static_cast<double>(range.codes.front());
        range.hi = static_cast<double>(range.codes.back());
      } else {
        const ColumnTransform& ct = forest.transform.cols[j];
        // Edge pieces keep collecting everything the tree routes their way,
        // so they extend to infinity in original units.
        range.lo = bounds[j].lo == 0.0
                       ? -std::numeric_limits<double>::infinity()
                       : ct.from_unit(bounds[j].lo);
        range.hi = bounds[j].hi == 1.0
                       ? std::numeric_limits<double>::infinity()
                       : ct.from_unit(bounds[j].hi);
      }
      report.ranges.push_back(std::move(range));
    }
    std::sort(report.ranges.begin(), report.ranges.end(),
              [](const WitnessRange& a, const WitnessRange& b) {
                if (a.log2_length != b.log2_length)
                  return a.log2_length < b.log2_length;
                return a.coord < b.coord;
              });
  }
  return out;
}

}  // namespace pidforest
