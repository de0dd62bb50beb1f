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
#include <optional>
#include <span>
#include <vector>

namespace pidforest {

/// Cell lengths induced by the midpoints between consecutive distinct sorted
/// values, rescaled so the node interval has length 1. Duplicate values
/// collapse into one cell whose weight counts the multiplicity.
struct GapArray {
  std::vector<double> f;                // cell lengths, sum 1 when built from points
  std::vector<double> endpoints;        // e_0..e_m in node coordinates
  std::vector<std::uint32_t> weights;   // points per cell, >= 1

  std::size_t size() const { return f.size(); }
  std::uint64_t total_weight() const;

  /// Wraps a raw positive array with unit weights and cumulative endpoints.
  static GapArray from_f(std::vector<double> values);
};

/// Midpoint cells for sorted projections inside the node interval [lo, hi].
/// Returns nullopt when fewer than 2 distinct values exist (the coordinate
/// cannot be split here).
std::optional<GapArray> build_gap_array(std::span<const double> sorted_values,
                                        double lo, double hi);

/// A partition of [m] into consecutive nonempty cells.
struct HistogramPartition {
  std::vector<std::size_t> boundaries;  // cell i covers [boundaries[i-1], boundaries[i])
  double cost = 0.0;                    // sum over cells of (sum f)^2 / (sum w)

  std::size_t cells() const { return boundaries.size() + 1; }
  std::size_t cell_begin(std::size_t i) const {
    return i == 0 ? 0 : boundaries[i - 1];
  }
  std::size_t cell_end(std::size_t i, std::size_t m) const {
    return i + 1 == cells() ? m : boundaries[i];
  }
};

/// Exact maximizer of the partition cost via O(m^2 k) dynamic programming.
/// Ties resolve to the lexicographically smallest boundary vector.
HistogramPartition ksplit_dp(const GapArray& f, std::size_t k);

/// One-pass approximation keeping a sparse DP frontier: states are retained
/// only when the accumulated squared error grows past a (1 + delta) step,
/// delta = eps / (2k). The returned partition's squared L2 error is within
/// (1 + eps) of optimal; it may use fewer than k cells when extra cells buy
/// nothing.
HistogramPartition ksplit_approx(const GapArray& f, std::size_t k,
                                 double eps = 0.1);

/// Squared L2 error of approximating each cell of f by its per-weight mean;
/// the quantity the approximate solver guarantees.
double partition_l2_error(const GapArray& f, const HistogramPartition& p);

/// Variance of the sparsity of a random sample point under the partition, in
/// units of the parent sparsity squared: sum q_i (p_i / q_i)^2 - 1.
double variance_of_partition(const GapArray& f, const HistogramPartition& p);

struct SplitResult {
  std::size_t coordinate = 0;
  std::vector<double> breakpoints;  // interior cut values, strictly inside (lo, hi)
  double variance = 0.0;
};

struct CoordinateSplitCandidate {
  double variance = 0.0;
  std::vector<double> breakpoints;
};

/// Best split of one continuous coordinate: gap array, approximate solver,
/// variance. nullopt when the coordinate has fewer than 2 distinct values.
std::optional<CoordinateSplitCandidate> best_continuous_split(
    std::span<const double> sorted_values, double lo, double hi,
    std::size_t max_degree, double eps = 0.1);

/// Variance below which a partition counts as "no signal".
inline constexpr double kVarianceTol = 1e-12;

/// Picks the coordinate whose best split maximizes the variance. Projections
/// must be sorted; node_bounds give the current interval per coordinate.
/// Returns nullopt when no coordinate is splittable or no variance exceeds
/// the tolerance. Ties go to the smallest coordinate index.
std::optional<SplitResult> best_split(
    const std::vector<std::vector<double>>& sorted_projections,
    const std::vector<std::pair<double, double>>& node_bounds,
    std::size_t max_degree);

}  // namespace pidforest
