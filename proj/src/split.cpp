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

#include "pidforest/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pidforest/common.hpp"

namespace pidforest {

namespace {

// Prefix sums of f, w, and f^2/w; interval statistics in O(1).
struct Prefix {
  std::vector<double> f, w, f2w;

  explicit Prefix(const GapArray& g) {
    const std::size_t m = g.size();
    f.assign(m + 1, 0.0);
    w.assign(m + 1, 0.0);
    f2w.assign(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double wi = static_cast<double>(g.weights[i]);
      f[i + 1] = f[i] + g.f[i];
      w[i + 1] = w[i] + g.weights[i];
      f2w[i + 1] = f2w[i] + g.f[i] * g.f[i] / wi;
    }
  }

  // Cells are half-open [b, e) in 0-based indices.
  double sum_f(std::size_t b, std::size_t e) const { return f[e] - f[b]; }
  double sum_w(std::size_t b, std::size_t e) const { return w[e] - w[b]; }
  double cell_cost(std::size_t b, std::size_t e) const {
    const double F = sum_f(b, e);
    return F * F / sum_w(b, e);
  }
  // Squared error of approximating the cell by its per-weight mean.
  // Clamped at zero against cancellation.
  double cell_error(std::size_t b, std::size_t e) const {
    return std::max(0.0, (f2w[e] - f2w[b]) - cell_cost(b, e));
  }
};

void check_kernel_args(const GapArray& g, std::size_t k) {
  const std::size_t m = g.size();
  if (m == 0) throw std::invalid_argument("empty gap array");
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  if (k > m) throw std::invalid_argument("more cells than points");
}

double partition_cost(const Prefix& pre, const HistogramPartition& p,
                      std::size_t m) {
  double cost = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i)
    cost += pre.cell_cost(p.cell_begin(i), p.cell_end(i, m));
  return cost;
}

}  // namespace

std::uint64_t GapArray::total_weight() const {
  return std::accumulate(weights.begin(), weights.end(), std::uint64_t{0});
}

GapArray GapArray::from_f(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empty gap array");
  GapArray g;
  g.endpoints.resize(values.size() + 1);
  g.endpoints[0] = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0))
      throw std::invalid_argument("gap array entries must be positive");
    g.endpoints[i + 1] = g.endpoints[i] + values[i];
  }
  g.weights.assign(values.size(), 1);
  g.f = std::move(values);
  return g;
}

std::optional<GapArray> build_gap_array(std::span<const double> sorted_values,
                                        double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("node interval must have lo < hi");
  GapArray g;
  for (const double v : sorted_values) {
    if (v < lo || v > hi)
      throw std::invalid_argument("value outside node interval");
    if (g.endpoints.empty() || v != g.endpoints.back()) {
      g.endpoints.push_back(v);  // distinct positions, endpoints filled below
      g.weights.push_back(1);
    } else {
      ++g.weights.back();
    }
  }
  std::size_t m = g.endpoints.size();
  if (m < 2) return std::nullopt;

  // endpoints currently holds distinct values; replace in place with the
  // node boundary plus midpoints. Adjacent values so close that their
  // midpoint rounds onto an existing endpoint are merged into one cell,
  // keeping every cell strictly positive.
  std::vector<double> e{lo};
  std::vector<std::uint32_t> weights;
  std::uint32_t carried = 0;
  for (std::size_t i = 0; i < m; ++i) {
    carried += g.weights[i];
    const double next =
        i + 1 < m ? (g.endpoints[i] + g.endpoints[i + 1]) / 2.0 : hi;
    if (next > e.back()) {
      e.push_back(next);
      weights.push_back(carried);
      carried = 0;
    }
  }
  if (carried > 0) weights.back() += carried;
  m = weights.size();
  if (m < 2) return std::nullopt;
  g.endpoints = std::move(e);
  g.weights = std::move(weights);

  const double len = hi - lo;
  g.f.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    g.f[i] = (g.endpoints[i + 1] - g.endpoints[i]) / len;
  return g;
}

HistogramPartition ksplit_dp(const GapArray& g, std::size_t k) {
  check_kernel_args(g, k);
  const std::size_t m = g.size();
  const Prefix pre(g);

  // best[j][i]: max cost of partitioning the suffix starting at cell i into
  // j+1 cells. A suffix formulation lets reconstruction pick the smallest
  // first cut, yielding the lexicographically least boundary vector.
  std::vector<std::vector<double>> best(
      k, std::vector<double>(m + 1, -std::numeric_limits<double>::infinity()));
  for (std::size_t i = 0; i < m; ++i) best[0][i] = pre.cell_cost(i, m);
  for (std::size_t j = 1; j < k; ++j) {
    // j+1 cells need at least j+1 remaining elements.
    for (std::size_t i = 0; i + j + 1 <= m; ++i) {
      double acc = -std::numeric_limits<double>::infinity();
      for (std::size_t e = i + 1; e + j <= m; ++e)
        acc = std::max(acc, pre.cell_cost(i, e) + best[j - 1][e]);
      best[j][i] = acc;
    }
  }

  HistogramPartition part;
  std::size_t i = 0;
  for (std::size_t j = k; j-- > 1;) {
    for (std::size_t e = i + 1; e + j <= m; ++e) {
      if (pre.cell_cost(i, e) + best[j - 1][e] == best[j][i]) {
        part.boundaries.push_back(e);
        i = e;
        break;
      }
    }
  }
  part.cost = best[k - 1][0];
  return part;
}

HistogramPartition ksplit_approx(const GapArray& g, std::size_t k, double eps) {
  check_kernel_args(g, k);
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const std::size_t m = g.size();
  const Prefix pre(g);
  const double delta = eps / (2.0 * static_cast<double>(k));

  // One frontier per cell count. Each state is an actual partition of the
  // prefix [0, pos) traced by `cuts`; its err is that partition's exact
  // error. States whose error falls inside the current (1+delta) bucket
  // overwrite the bucket's representative, keeping only the largest pos.
  struct State {
    std::size_t pos = 0;
    double err = 0.0;
    std::vector<std::size_t> cuts;  // cell end positions, ending with pos
  };
  struct Level {
    std::vector<State> states;
    double anchor = -1.0;  // error of the state that opened the last bucket

    void insert(State s, double delta_) {
      if (states.empty() || s.err > (1.0 + delta_) * anchor) {
        anchor = s.err;
        states.push_back(std::move(s));
      } else {
        states.back() = std::move(s);
      }
    }
  };
  std::vector<Level> levels(k);  // levels[b]: partitions into b+1 cells

  std::vector<State> pending;
  for (std::size_t u = 1; u <= m; ++u) {
    // Candidates for every level are read off the frontier as it stood
    // before this element, then inserted together.
    pending.clear();
    const std::size_t top = std::min(u, k) - 1;  // b+1 cells need u >= b+1
    for (std::size_t b = 0; b <= top; ++b) {
      const bool useful = (b + 1 < k) || (u == m);
      if (!useful) continue;
      State s;
      s.pos = u;
      if (b == 0) {
        s.err = pre.cell_error(0, u);
        s.cuts = {u};
      } else {
        double best_err = std::numeric_limits<double>::infinity();
        const State* best_prev = nullptr;
        for (const State& prev : levels[b - 1].states) {
          if (prev.pos >= u) continue;
          const double e = prev.err + pre.cell_error(prev.pos, u);
          if (e < best_err) {
            best_err = e;
            best_prev = &prev;
          }
        }
        if (best_prev == nullptr) continue;
        s.err = best_err;
        s.cuts = best_prev->cuts;
        s.cuts.push_back(u);
      }
      pending.push_back(std::move(s));
    }
    for (State& s : pending) {
      const std::size_t b = s.cuts.size() - 1;  // cuts carries one entry per cell
      levels[b].insert(std::move(s), delta);
    }
  }

  // Best complete partition with at most k cells: any state at pos == m.
  const State* winner = nullptr;
  for (std::size_t b = 0; b < k; ++b) {
    for (const State& s : levels[b].states) {
      if (s.pos != m) continue;
      if (winner == nullptr || s.err < winner->err) winner = &s;
    }
  }
  if (winner == nullptr)
    throw std::logic_error("approximate split frontier lost all states");

  HistogramPartition part;
  part.boundaries.assign(winner->cuts.begin(), winner->cuts.end() - 1);
  part.cost = partition_cost(pre, part, m);
  return part;
}

double partition_l2_error(const GapArray& g, const HistogramPartition& p) {
  const Prefix pre(g);
  double err = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i)
    err += pre.cell_error(p.cell_begin(i), p.cell_end(i, g.size()));
  return err;
}

double variance_of_partition(const GapArray& g, const HistogramPartition& p) {
  const Prefix pre(g);
  const std::size_t m = g.size();
  const double total_f = pre.sum_f(0, m);
  const double total_w = pre.sum_w(0, m);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.cells(); ++i) {
    const std::size_t b = p.cell_begin(i);
    const std::size_t e = p.cell_end(i, m);
    const double pi = pre.sum_f(b, e) / total_f;
    const double qi = pre.sum_w(b, e) / total_w;
    acc += pi * pi / qi;
  }
  return acc - 1.0;
}

std::optional<CoordinateSplitCandidate> best_continuous_split(
    std::span<const double> sorted_values, double lo, double hi,
    std::size_t max_degree, double eps) {
  const auto gap = build_gap_array(sorted_values, lo, hi);
  if (!gap) return std::nullopt;
  const std::size_t k = std::min(max_degree, gap->size());
  const HistogramPartition part = ksplit_approx(*gap, k, eps);
  CoordinateSplitCandidate cand;
  cand.variance = variance_of_partition(*gap, part);
  cand.breakpoints.reserve(part.boundaries.size());
  for (const std::size_t cut : part.boundaries)
    cand.breakpoints.push_back(gap->endpoints[cut]);
  return cand;
}

std::optional<SplitResult> best_split(
    const std::vector<std::vector<double>>& sorted_projections,
    const std::vector<std::pair<double, double>>& node_bounds,
    std::size_t max_degree) {
  if (sorted_projections.size() != node_bounds.size())
    throw std::invalid_argument("projection/bounds size mismatch");
  std::optional<SplitResult> best;
  for (std::size_t j = 0; j < sorted_projections.size(); ++j) {
    const auto cand = best_continuous_split(
        sorted_projections[j], node_bounds[j].first, node_bounds[j].second,
        max_degree);
    if (!cand) continue;
    if (!best || cand->variance > best->variance) {
      best = SplitResult{j, cand->breakpoints, cand->variance};
    }
  }
  if (!best || best->variance <= kVarianceTol) return std::nullopt;
  return best;
}

}  // namespace pidforest
