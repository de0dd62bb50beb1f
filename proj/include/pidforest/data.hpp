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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pidforest/core.hpp"

namespace pidforest {

struct SchemaColumn {
  std::string name;
  AttributeKind kind = AttributeKind::kContinuous;
  std::uint32_t domain_size = 0;  // required for categorical columns
};

/// Column typing for CSV ingestion. Feature order follows the schema, not
/// the file.
struct Schema {
  std::vector<SchemaColumn> columns;
  std::string label_column;  // empty: unlabeled data

  static Schema from_json_file(const std::string& path);
  static Schema from_json(std::string_view text);
};

/// Parses a header-first CSV against the schema. Malformed fields are
/// rejected with their row number and column name.
Dataset load_csv(const std::string& path, const Schema& schema);

/// Schema-free variant: every column continuous; a column named "label" or
/// "anomaly" (if present) becomes the label.
Dataset load_csv_auto(const std::string& path);

void write_csv(const Dataset& ds, const std::string& path);

/// Sliding windows of the series: n - w + 1 rows of width w. A window is
/// labeled anomalous iff it overlaps a labeled timestep.
Dataset shingle(std::span<const double> series,
                std::span<const std::uint8_t> step_labels, std::size_t width);

/// 970 random corners of {-1,1}^10 plus 30 all-zeros rows (the labeled
/// anomalies), in 10 continuous columns.
Dataset gen_masking(std::uint64_t seed);

struct GaussianMixtureMeta {
  std::array<double, 2> mean1{}, mean2{};
  std::array<double, 4> cov1{}, cov2{};  // row-major 2x2
  std::vector<double> likelihoods;       // mixture density per point
};

/// 1000 points: first two coordinates from a mixture of two Gaussians
/// (covariance eigenvalues {1, 2}, random eigenvectors, means 5 apart),
/// d_noise further coordinates uniform in [noise_lo, noise_hi]. The 100
/// lowest-likelihood points are labeled anomalous.
Dataset gen_gaussian_mixture(std::size_t d_noise, double noise_lo,
                             double noise_hi, std::uint64_t seed,
                             GaussianMixtureMeta* meta = nullptr);

struct SineSeries {
  std::vector<double> values;
  std::vector<std::uint8_t> labels;
  std::vector<std::size_t> anomaly_starts;
};

/// sin(2*pi*i/40) with 10 frozen segments of 20 steps (the anomalies),
/// separated by at least one period, plus Gaussian noise.
SineSeries gen_sine_anomalies(std::uint64_t seed, std::size_t length = 4000,
                              double noise_sigma = 0.05);

}  // namespace pidforest
