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
#include <vector>

#include "pidforest/core.hpp"

namespace pidforest {

/// Points in {0,1}^d, each stored as a bitmask. Small d only; every oracle
/// here enumerates all 2^d coordinate subsets.
struct BooleanDataset {
  std::vector<std::uint32_t> points;
  int d = 0;

  static constexpr int kMaxDim = 20;

  /// Rows of 0/1 values; throws on anything else or d > 20.
  static BooleanDataset from_rows(const std::vector<std::vector<int>>& rows);
  static BooleanDataset from_masks(std::vector<std::uint32_t> masks, int d);

  std::size_t n() const { return points.size(); }
  bool has_duplicates() const;
};

/// Minimum number of coordinates that must be revealed to single out point
/// `idx` among all others. Throws if the dataset contains duplicates.
int id_length(const BooleanDataset& data, std::size_t idx);

struct PidResult {
  double length = 0.0;              // |S| + log2(impostors) at the optimum
  std::vector<int> witness;         // optimal coordinate set S, sorted
  std::uint64_t impostors = 0;      // |Imp(x, T, S)| for the witness
};

/// Minimizes |S| + log2(|Imp(x,T,S)|) over all S. Ties prefer smaller |S|,
/// then the lexicographically smallest S.
PidResult pid_length_boolean(const BooleanDataset& data, std::size_t idx);

struct BooleanSparsity {
  std::uint64_t volume = 0;      // 2^(d - |S|) for the best subcube
  std::uint64_t count = 0;       // points of T inside it
  std::vector<int> fixed_coords;
  double value() const;          // volume / count
  double log2_value() const;
};

/// Maximum over all subcubes C containing the point of |C| divided by the
/// number of dataset points inside C, found by direct subcube enumeration.
/// Comparisons are exact (integer cross-multiplication), so results can be
/// checked against pid_length_boolean without floating-point slack.
BooleanSparsity max_boolean_subcube_sparsity(const BooleanDataset& data,
                                             std::size_t idx);

/// Discrete index interval {lo, ..., hi}, inclusive, 0-based.
struct DiscreteInterval {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::size_t size() const { return hi - lo + 1; }
};

struct DensestResult {
  double density = 0.0;
  DiscreteInterval interval;
};

/// For each index j, the interval containing j that maximizes the average of
/// `a` over it. Exact O(n^2) sweep. Near-equal densities (relative 1e-12)
/// count as ties; ties prefer the shorter interval, then the smaller lo.
std::vector<DensestResult> densest_interval_all(std::span<const double> a);

/// Weighted variant: maximizes sum(a) / sum(w) instead of sum(a) / length.
std::vector<DensestResult> densest_interval_all_weighted(
    std::span<const double> a, std::span<const double> w);

struct ScoredInterval {
  double log2_score = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Exact 1-d scores for a sorted array of points in [0,1], one result per
/// input element. Duplicates are collapsed into a single weighted position.
std::vector<ScoredInterval> pidscore_1d(std::span<const double> sorted_points);

struct BruteforceScore {
  double log2_score = 0.0;
  Subcube witness;
};

/// Exhaustive subcube search over candidate interval endpoints (0, 1, and
/// midpoints of consecutive distinct values per coordinate). Counts points
/// by direct membership tests. Feasible for d <= 3 only.
std::vector<BruteforceScore> pidscore_bruteforce_all(const Dataset& normalized);
BruteforceScore pidscore_bruteforce(const Dataset& normalized, std::size_t idx);

}  // namespace pidforest
