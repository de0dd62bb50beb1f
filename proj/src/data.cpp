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

#include "pidforest/data.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace pidforest {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_number(const std::string& field, std::size_t row,
                    const std::string& column) {
  const std::string t = trim(field);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc{} || res.ptr != end)
    throw data_error("row " + std::to_string(row) + ", column '" + column +
                     "': not a number: '" + t + "'");
  return value;
}

AttributeKind parse_kind(const std::string& name) {
  if (name == "continuous") return AttributeKind::kContinuous;
  if (name == "categorical_ordered") return AttributeKind::kCategoricalOrdered;
  if (name == "categorical_unordered")
    return AttributeKind::kCategoricalUnordered;
  throw schema_error("unknown column kind '" + name + "'");
}

}  // namespace

Schema Schema::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("malformed schema: ") + e.what());
  }
  Schema schema;
  try {
    for (const auto& jc : doc.at("columns")) {
      SchemaColumn col;
      col.name = jc.at("name").get<std::string>();
      col.kind = parse_kind(jc.at("kind").get<std::string>());
      if (col.kind != AttributeKind::kContinuous) {
        col.domain_size = jc.at("domain_size").get<std::uint32_t>();
        if (col.domain_size < 1)
          throw schema_error("column '" + col.name + "': domain_size must be >= 1");
      }
      schema.columns.push_back(std::move(col));
    }
    if (doc.contains("label"))
      schema.label_column = doc["label"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("malformed schema: ") + e.what());
  }
  if (schema.columns.empty()) throw schema_error("schema lists no columns");
  return schema;
}

Schema Schema::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open schema file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

Dataset load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open input file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw data_error("empty input");
  const auto header = split_line(line);

  std::vector<std::size_t> field_of(schema.columns.size());
  for (std::size_t j = 0; j < schema.columns.size(); ++j) {
    const auto it =
        std::find(header.begin(), header.end(), schema.columns[j].name);
    if (it == header.end())
      throw schema_error("missing column '" + schema.columns[j].name + "'");
    field_of[j] = static_cast<std::size_t>(it - header.begin());
  }
  std::size_t label_field = header.size();
  if (!schema.label_column.empty()) {
    const auto it =
        std::find(header.begin(), header.end(), schema.label_column);
    if (it == header.end())
      throw schema_error("missing column '" + schema.label_column + "'");
    label_field = static_cast<std::size_t>(it - header.begin());
  }

  Dataset ds;
  ds.d = schema.columns.size();
  for (const SchemaColumn& col : schema.columns) {
    AttributeSpec spec;
    spec.name = col.name;
    spec.kind = col.kind;
    spec.domain_size = col.domain_size;
    ds.columns.push_back(std::move(spec));
  }

  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size())
      throw data_error("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    for (std::size_t j = 0; j < ds.d; ++j) {
      const double v =
          parse_number(fields[field_of[j]], row, schema.columns[j].name);
      if (ds.columns[j].is_categorical()) {
        if (v != std::floor(v) || v < 0.0 ||
            v >= static_cast<double>(ds.columns[j].domain_size))
          throw data_error("row " + std::to_string(row) + ", column '" +
                           schema.columns[j].name + "': invalid category code");
      }
      ds.values.push_back(v);
    }
    if (label_field < header.size()) {
      const double l = parse_number(fields[label_field], row, schema.label_column);
      if (l != 0.0 && l != 1.0)
        throw data_error("row " + std::to_string(row) + ", column '" +
                         schema.label_column + "': label must be 0 or 1");
      ds.labels.push_back(static_cast<std::uint8_t>(l));
    }
    ++ds.n;
  }
  if (ds.n == 0) throw data_error("empty input");
  refresh_observed_bounds(ds);
  validate_dataset(ds);
  return ds;
}

Dataset load_csv_auto(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open input file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty input");
  const auto header = split_line(line);
  Schema schema;
  for (const std::string& raw : header) {
    const std::string name = trim(raw);
    if (name == "label" || name == "anomaly") {
      schema.label_column = name;
      continue;
    }
    schema.columns.push_back({name, AttributeKind::kContinuous, 0});
  }
  if (schema.columns.empty()) throw schema_error("no feature columns in header");
  return load_csv(path, schema);
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open output file '" + path + "'");
  for (std::size_t j = 0; j < ds.d; ++j) {
    if (j) out << ',';
    out << (ds.columns[j].name.empty() ? "x" + std::to_string(j + 1)
                                       : ds.columns[j].name);
  }
  if (ds.has_labels()) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (std::size_t j = 0; j < ds.d; ++j) {
      if (j) out << ',';
      out << format_double(ds.at(i, j));
    }
    if (ds.has_labels()) out << ',' << static_cast<int>(ds.labels[i]);
    out << '\n';
  }
}

Dataset shingle(std::span<const double> series,
                std::span<const std::uint8_t> step_labels, std::size_t width) {
  if (width < 1) throw std::invalid_argument("width must be >= 1");
  if (series.size() < width) throw data_error("series shorter than window");
  if (!step_labels.empty() && step_labels.size() != series.size())
    throw std::invalid_argument("label length mismatch");

  Dataset ds;
  ds.d = width;
  ds.n = series.size() - width + 1;
  ds.columns.resize(width);
  for (std::size_t j = 0; j < width; ++j)
    ds.columns[j].name = "w" + std::to_string(j + 1);
  ds.values.reserve(ds.n * width);
  for (std::size_t i = 0; i < ds.n; ++i)
    for (std::size_t j = 0; j < width; ++j)
      ds.values.push_back(series[i + j]);
  if (!step_labels.empty()) {
    ds.labels.resize(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) {
      std::uint8_t any = 0;
      for (std::size_t j = 0; j < width; ++j) any |= step_labels[i + j];
      ds.labels[i] = any;
    }
  }
  refresh_observed_bounds(ds);
  return ds;
}

Dataset gen_masking(std::uint64_t seed) {
  constexpr std::size_t kDim = 10;
  constexpr std::size_t kCorners = 970;
  constexpr std::size_t kZeros = 30;

  Rng rng(seed);
  Dataset ds;
  ds.d = kDim;
  ds.n = kCorners + kZeros;
  ds.columns.resize(kDim);
  for (std::size_t j = 0; j < kDim; ++j)
    ds.columns[j].name = "x" + std::to_string(j + 1);
  ds.values.reserve(ds.n * kDim);
  for (std::size_t i = 0; i < kCorners; ++i)
    for (std::size_t j = 0; j < kDim; ++j)
      ds.values.push_back((rng.next() & 1u) ? 1.0 : -1.0);
  ds.values.insert(ds.values.end(), kZeros * kDim, 0.0);
  ds.labels.assign(ds.n, 0);
  std::fill(ds.labels.begin() + kCorners, ds.labels.end(), 1);
  refresh_observed_bounds(ds);
  return ds;
}

Dataset gen_gaussian_mixture(std::size_t d_noise, double noise_lo,
                             double noise_hi, std::uint64_t seed,
                             GaussianMixtureMeta* meta) {
  if (!(noise_lo < noise_hi) && d_noise > 0)
    throw std::invalid_argument("noise range must have lo < hi");
  constexpr std::size_t kPoints = 1000;
  constexpr std::size_t kAnomalies = 100;

  Rng rng(seed);

  // Each component: covariance with eigenvalues {1, 2} and a random
  // eigenbasis. Means sit 5 apart.
  struct Component {
    std::array<double, 2> mean;
    std::array<double, 4> basis;  // columns scaled by sqrt(eigenvalue)
    std::array<double, 4> cov;
  };
  auto make_component = [&](std::array<double, 2> mean) {
    Component c;
    c.mean = mean;
    const double theta = 2.0 * kPi * rng.unit();
    const double ct = std::cos(theta), st = std::sin(theta);
    const double s1 = 1.0, s2 = std::sqrt(2.0);
    // A = R * diag(sqrt(1), sqrt(2)); cov = A A^T.
    c.basis = {ct * s1, -st * s2, st * s1, ct * s2};
    c.cov = {c.basis[0] * c.basis[0] + c.basis[1] * c.basis[1],
             c.basis[0] * c.basis[2] + c.basis[1] * c.basis[3],
             c.basis[2] * c.basis[0] + c.basis[3] * c.basis[1],
             c.basis[2] * c.basis[2] + c.basis[3] * c.basis[3]};
    return c;
  };
  const double phi = 2.0 * kPi * rng.unit();
  const Component comp1 = make_component({0.0, 0.0});
  const Component comp2 =
      make_component({5.0 * std::cos(phi), 5.0 * std::sin(phi)});

  Dataset ds;
  ds.d = 2 + d_noise;
  ds.n = kPoints;
  ds.columns.resize(ds.d);
  ds.columns[0].name = "x1";
  ds.columns[1].name = "x2";
  for (std::size_t j = 0; j < d_noise; ++j)
    ds.columns[2 + j].name = "noise" + std::to_string(j + 1);
  ds.values.resize(ds.n * ds.d);
  for (std::size_t i = 0; i < kPoints; ++i) {
    const Component& c = (rng.next() & 1u) ? comp2 : comp1;
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    ds.values[i * ds.d] = c.mean[0] + c.basis[0] * z1 + c.basis[1] * z2;
    ds.values[i * ds.d + 1] = c.mean[1] + c.basis[2] * z1 + c.basis[3] * z2;
    for (std::size_t j = 0; j < d_noise; ++j)
      ds.values[i * ds.d + 2 + j] =
          noise_lo + rng.unit() * (noise_hi - noise_lo);
  }

  // The noise coordinates are uniform, so the mixture density of the first
  // two coordinates orders the points by likelihood.
  auto component_pdf = [](const Component& c, double x, double y) {
    const double dx = x - c.mean[0];
    const double dy = y - c.mean[1];
    const double det = c.cov[0] * c.cov[3] - c.cov[1] * c.cov[2];
    const double inv00 = c.cov[3] / det, inv01 = -c.cov[1] / det,
                 inv11 = c.cov[0] / det;
    const double quad = dx * dx * inv00 + 2.0 * dx * dy * inv01 + dy * dy * inv11;
    return std::exp(-0.5 * quad) / (2.0 * kPi * std::sqrt(det));
  };
  std::vector<double> likelihood(kPoints);
  for (std::size_t i = 0; i < kPoints; ++i) {
    const double x = ds.values[i * ds.d];
    const double y = ds.values[i * ds.d + 1];
    likelihood[i] =
        0.5 * component_pdf(comp1, x, y) + 0.5 * component_pdf(comp2, x, y);
  }
  std::vector<std::size_t> order(kPoints);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return likelihood[a] < likelihood[b];
  });
  ds.labels.assign(kPoints, 0);
  for (std::size_t i = 0; i < kAnomalies; ++i) ds.labels[order[i]] = 1;

  if (meta != nullptr) {
    meta->mean1 = comp1.mean;
    meta->mean2 = comp2.mean;
    meta->cov1 = comp1.cov;
    meta->cov2 = comp2.cov;
    meta->likelihoods = std::move(likelihood);
  }
  refresh_observed_bounds(ds);
  return ds;
}

SineSeries gen_sine_anomalies(std::uint64_t seed, std::size_t length,
                              double noise_sigma) {
  constexpr std::size_t kSegments = 10;
  constexpr std::size_t kSegmentLen = 20;
  constexpr std::size_t kPeriod = 40;
  if (length < kSegments * (kSegmentLen + kPeriod) + kPeriod)
    throw std::invalid_argument("series too short for 10 spaced anomalies");

  Rng rng(seed);
  SineSeries out;
  out.values.resize(length);
  for (std::size_t i = 0; i < length; ++i)
    out.values[i] = std::sin(2.0 * kPi * static_cast<double>(i) /
                             static_cast<double>(kPeriod));

  // Segment starts, non-overlapping and at least one period apart.
  std::vector<std::size_t> starts;
  while (starts.size() < kSegments) {
    const std::size_t s = rng.below(length - kSegmentLen);
    bool ok = true;
    for (const std::size_t existing : starts) {
      const std::size_t gap = s > existing ? s - existing : existing - s;
      if (gap < kSegmentLen + kPeriod) {
        ok = false;
        break;
      }
    }
    if (ok) starts.push_back(s);
  }
  std::sort(starts.begin(), starts.end());
  out.anomaly_starts = starts;

  out.labels.assign(length, 0);
  for (const std::size_t s : starts) {
    const double frozen = out.values[s];
    for (std::size_t i = 0; i < kSegmentLen; ++i) {
      out.values[s + i] = frozen;
      out.labels[s + i] = 1;
    }
  }
  if (noise_sigma > 0.0)
    for (double& v : out.values) v += noise_sigma * rng.normal();
  return out;
}

}  // namespace pidforest
