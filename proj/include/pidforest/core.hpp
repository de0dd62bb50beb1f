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
#include <string>
#include <utility>
#include <vector>

#include "pidforest/common.hpp"

namespace pidforest {

enum class AttributeKind : std::uint8_t {
  kContinuous,
  kCategoricalOrdered,
  kCategoricalUnordered,
};

/// Per-column domain metadata. Continuous columns carry the observed value
/// range, categorical ones the size of their code domain.
struct AttributeSpec {
  AttributeKind kind = AttributeKind::kContinuous;
  std::string name;
  double observed_min = 0.0;
  double observed_max = 0.0;
  std::uint32_t domain_size = 0;  // categorical: codes are in [0, domain_size)

  bool is_categorical() const { return kind != AttributeKind::kContinuous; }
};

/// Column-typed point collection. Values are stored row-major; categorical
/// entries hold integer codes.
struct Dataset {
  std::vector<AttributeSpec> columns;
  std::vector<double> values;        // n * d, row-major
  std::vector<std::uint8_t> labels;  // empty, or one 0/1 flag per row
  std::size_t n = 0;
  std::size_t d = 0;

  double at(std::size_t row, std::size_t col) const {
    return values[row * d + col];
  }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * d, d};
  }
  bool has_labels() const { return !labels.empty(); }
};

/// Checks the Dataset invariants: value ranges for continuous columns, code
/// ranges for categorical ones, label shape. Throws data_error on violation.
void validate_dataset(const Dataset& ds);

/// Fills in observed_min/observed_max of continuous columns from the data.
void refresh_observed_bounds(Dataset& ds);

/// One side of a subcube: a continuous sub-range of [0,1] or a set of
/// category codes.
class Interval {
 public:
  static Interval continuous(double lo, double hi);
  static Interval categorical(std::vector<std::uint32_t> codes,
                              std::uint32_t domain_size);
  static Interval full(const AttributeSpec& spec);

  bool is_categorical() const { return categorical_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<std::uint32_t>& codes() const { return codes_; }
  std::uint32_t domain_size() const { return domain_size_; }

  /// In [0, 1]; 1 means the coordinate is unconstrained.
  double length() const;
  double log2_length() const;
  bool is_full() const;
  bool contains(double value) const;

 private:
  Interval() = default;
  bool categorical_ = false;
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<std::uint32_t> codes_;  // sorted
  std::uint32_t domain_size_ = 0;
};

/// Product of one interval per coordinate with its log2 volume.
struct Subcube {
  std::vector<Interval> intervals;
  double log2_volume = 0.0;
  bool degenerate = false;  // some side has length 0; never scored

  static Subcube full_cube(const std::vector<AttributeSpec>& columns);
  static Subcube from_intervals(std::vector<Interval> intervals);

  Subcube refined(std::size_t coord, Interval piece) const;
  bool contains(std::span<const double> point) const;
};

/// log2 of vol(C) / count, the quantity every sparsity comparison uses.
double log2_sparsity(const Subcube& cube, std::uint64_t count);

/// Affine map of one continuous column onto [0, 1].
struct ColumnTransform {
  double min = 0.0;
  double span = 1.0;       // observed_max - observed_min
  bool constant = false;   // degenerate range; column excluded from splits
  bool categorical = false;  // identity entry, kept for positional lookup

  /// Maps into [0,1], clipping values outside the observed range.
  double to_unit(double x) const {
    if (categorical) return x;
    if (constant) return 0.5;
    const double u = (x - min) / span;
    return u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
  }
  double from_unit(double u) const {
    if (categorical || constant) return u;
    return min + span * u;
  }
};

struct NormalizationTransform {
  std::vector<ColumnTransform> cols;
};

/// Maps every continuous column onto [0,1] (observed_min -> 0,
/// observed_max -> 1; constant columns to 0.5). Categorical columns pass
/// through. The returned transform reproduces the map for unseen points.
std::pair<Dataset, NormalizationTransform> normalize(const Dataset& dataset);

}  // namespace pidforest
