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

#include "pidforest/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace pidforest {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void validate_dataset(const Dataset& ds) {
  if (ds.d != ds.columns.size()) throw data_error("column count mismatch");
  if (ds.values.size() != ds.n * ds.d) throw data_error("value table shape mismatch");
  if (!ds.labels.empty() && ds.labels.size() != ds.n)
    throw data_error("label count mismatch");
  for (std::size_t j = 0; j < ds.d; ++j) {
    const AttributeSpec& col = ds.columns[j];
    if (col.is_categorical()) {
      if (col.domain_size < 1)
        throw data_error("column '" + col.name + "': domain_size must be >= 1");
      for (std::size_t i = 0; i < ds.n; ++i) {
        const double v = ds.at(i, j);
        if (v < 0.0 || v >= static_cast<double>(col.domain_size) ||
            v != std::floor(v))
          throw data_error("column '" + col.name + "', row " +
                           std::to_string(i) + ": invalid category code");
      }
    } else {
      if (col.observed_min > col.observed_max)
        throw data_error("column '" + col.name + "': observed_min > observed_max");
      for (std::size_t i = 0; i < ds.n; ++i) {
        const double v = ds.at(i, j);
        if (!(v >= col.observed_min && v <= col.observed_max))
          throw data_error("column '" + col.name + "', row " +
                           std::to_string(i) + ": value outside observed range");
      }
    }
  }
  for (const std::uint8_t l : ds.labels)
    if (l > 1) throw data_error("labels must be 0 or 1");
}

void refresh_observed_bounds(Dataset& ds) {
  for (std::size_t j = 0; j < ds.d; ++j) {
    if (ds.columns[j].is_categorical()) continue;
    double lo = ds.at(0, j), hi = ds.at(0, j);
    for (std::size_t i = 1; i < ds.n; ++i) {
      lo = std::min(lo, ds.at(i, j));
      hi = std::max(hi, ds.at(i, j));
    }
    ds.columns[j].observed_min = lo;
    ds.columns[j].observed_max = hi;
  }
}

Interval Interval::continuous(double lo, double hi) {
  if (!(lo <= hi) || lo < 0.0 || hi > 1.0)
    throw std::invalid_argument("interval endpoints must satisfy 0 <= lo <= hi <= 1");
  Interval iv;
  iv.categorical_ = false;
  iv.lo_ = lo;
  iv.hi_ = hi;
  return iv;
}

Interval Interval::categorical(std::vector<std::uint32_t> codes,
                               std::uint32_t domain_size) {
  if (domain_size < 1) throw std::invalid_argument("domain_size must be >= 1");
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  if (!codes.empty() && codes.back() >= domain_size)
    throw std::invalid_argument("category code outside domain");
  Interval iv;
  iv.categorical_ = true;
  iv.codes_ = std::move(codes);
  iv.domain_size_ = domain_size;
  return iv;
}

Interval Interval::full(const AttributeSpec& spec) {
  if (!spec.is_categorical()) return continuous(0.0, 1.0);
  std::vector<std::uint32_t> all(spec.domain_size);
  for (std::uint32_t c = 0; c < spec.domain_size; ++c) all[c] = c;
  return categorical(std::move(all), spec.domain_size);
}

double Interval::length() const {
  if (categorical_)
    return static_cast<double>(codes_.size()) / static_cast<double>(domain_size_);
  return hi_ - lo_;
}

double Interval::log2_length() const { return std::log2(length()); }

bool Interval::is_full() const { return length() == 1.0; }

bool Interval::contains(double value) const {
  if (categorical_) {
    if (value < 0.0 || value != std::floor(value)) return false;
    const auto code = static_cast<std::uint32_t>(value);
    return std::binary_search(codes_.begin(), codes_.end(), code);
  }
  return value >= lo_ && value <= hi_;
}

Subcube Subcube::full_cube(const std::vector<AttributeSpec>& columns) {
  std::vector<Interval> ivs;
  ivs.reserve(columns.size());
  for (const auto& col : columns) ivs.push_back(Interval::full(col));
  return from_intervals(std::move(ivs));
}

Subcube Subcube::from_intervals(std::vector<Interval> intervals) {
  Subcube cube;
  cube.intervals = std::move(intervals);
  cube.log2_volume = 0.0;
  for (const Interval& iv : cube.intervals) {
    const double len = iv.length();
    if (len == 0.0) {
      cube.degenerate = true;
      cube.log2_volume = -std::numeric_limits<double>::infinity();
      return cube;
    }
    cube.log2_volume += std::log2(len);
  }
  return cube;
}

Subcube Subcube::refined(std::size_t coord, Interval piece) const {
  std::vector<Interval> ivs = intervals;
  ivs[coord] = std::move(piece);
  return from_intervals(std::move(ivs));
}

bool Subcube::contains(std::span<const double> point) const {
  if (point.size() != intervals.size()) return false;
  for (std::size_t j = 0; j < intervals.size(); ++j)
    if (!intervals[j].contains(point[j])) return false;
  return true;
}

double log2_sparsity(const Subcube& cube, std::uint64_t count) {
  if (count == 0) throw std::invalid_argument("empty cell has undefined sparsity");
  if (cube.degenerate)
    throw std::invalid_argument("degenerate subcube has undefined sparsity");
  return cube.log2_volume - std::log2(static_cast<double>(count));
}

std::pair<Dataset, NormalizationTransform> normalize(const Dataset& dataset) {
  if (dataset.n == 0) throw data_error("empty input");
  if (dataset.d == 0) throw data_error("dataset has zero columns");

  NormalizationTransform transform;
  transform.cols.resize(dataset.d);
  Dataset out = dataset;
  for (std::size_t j = 0; j < dataset.d; ++j) {
    ColumnTransform& ct = transform.cols[j];
    const AttributeSpec& col = dataset.columns[j];
    if (col.is_categorical()) {
      ct.categorical = true;
      continue;
    }
    ct.min = col.observed_min;
    ct.span = col.observed_max - col.observed_min;
    ct.constant = !(ct.span > 0.0);
    for (std::size_t i = 0; i < dataset.n; ++i)
      out.values[i * dataset.d + j] = ct.to_unit(dataset.at(i, j));
    out.columns[j].observed_min = ct.constant ? 0.5 : 0.0;
    out.columns[j].observed_max = ct.constant ? 0.5 : 1.0;
  }
  return {std::move(out), std::move(transform)};
}

}  // namespace pidforest
