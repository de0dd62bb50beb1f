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

namespace pidforest {

/// Rank-based AUC (Mann-Whitney) with ties counted 0.5. Throws when labels
/// are single-class.
double auc(std::span<const double> scores,
           std::span<const std::uint8_t> labels);

/// Among the ceil(fraction * n) highest-scored points, the fraction that are
/// labeled anomalous. Score ties break by stable index order.
double top_fraction_accuracy(std::span<const double> scores,
                             std::span<const std::uint8_t> labels,
                             double fraction);

/// Fraction of the labeled anomalies that appear among the
/// ceil(fraction * n) highest-scored points.
double recall_at_fraction(std::span<const double> scores,
                          std::span<const std::uint8_t> labels,
                          double fraction);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Monotone staircase from (0,0) to (1,1), one vertex per distinct score.
/// Its trapezoid integral equals auc().
std::vector<RocPoint> roc_points(std::span<const double> scores,
                                 std::span<const std::uint8_t> labels);

}  // namespace pidforest
