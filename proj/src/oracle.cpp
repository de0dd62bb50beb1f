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

#include "pidforest/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pidforest {

namespace {

// Relative tolerance under which two interval densities count as equal.
constexpr double kDensityTieTol = 1e-12;

std::vector<int> mask_to_coords(std::uint32_t mask) {
  std::vector<int> coords;
  for (int j = 0; mask != 0; ++j, mask >>= 1)
    if (mask & 1u) coords.push_back(j);
  return coords;
}

// Lexicographic order on the sorted element lists of two equal-size sets:
// at the first coordinate where membership differs, the set containing it
// comes first.
bool lex_set_less(std::uint32_t a, std::uint32_t b) {
  const std::uint32_t diff = a ^ b;
  if (diff == 0) return false;
  const std::uint32_t lowest = diff & (~diff + 1u);
  return (a & lowest) != 0;
}

std::uint64_t count_agreeing(const BooleanDataset& data, std::uint32_t x,
                             std::uint32_t mask) {
  std::uint64_t cnt = 0;
  const std::uint32_t key = x & mask;
  for (const std::uint32_t y : data.points)
    if ((y & mask) == key) ++cnt;
  return cnt;
}

}  // namespace

BooleanDataset BooleanDataset::from_rows(
    const std::vector<std::vector<int>>& rows) {
  if (rows.empty()) throw data_error("empty input");
  const std::size_t d = rows.front().size();
  if (d == 0 || d > kMaxDim)
    throw data_error("boolean oracle supports 1 <= d <= 20");
  BooleanDataset out;
  out.d = static_cast<int>(d);
  out.points.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.size() != d) throw data_error("ragged boolean row");
    std::uint32_t mask = 0;
    for (std::size_t j = 0; j < d; ++j) {
      if (row[j] != 0 && row[j] != 1)
        throw data_error("boolean dataset values must be 0 or 1");
      if (row[j]) mask |= 1u << j;
    }
    out.points.push_back(mask);
  }
  return out;
}

BooleanDataset BooleanDataset::from_masks(std::vector<std::uint32_t> masks,
                                          int d) {
  if (masks.empty()) throw data_error("empty input");
  if (d < 1 || d > kMaxDim)
    throw data_error("boolean oracle supports 1 <= d <= 20");
  for (const std::uint32_t m : masks)
    if (d < 32 && (m >> d) != 0) throw data_error("mask exceeds dimension");
  BooleanDataset out;
  out.d = d;
  out.points = std::move(masks);
  return out;
}

bool BooleanDataset::has_duplicates() const {
  std::vector<std::uint32_t> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

int id_length(const BooleanDataset& data, std::size_t idx) {
  if (data.has_duplicates())
    throw std::invalid_argument("idLength undefined with duplicates");
  const std::uint32_t x = data.points[idx];
  const std::uint32_t all = (data.d == 32) ? ~0u : ((1u << data.d) - 1u);
  for (int size = 0; size <= data.d; ++size) {
    for (std::uint32_t mask = 0;; ++mask) {
      if (std::popcount(mask) == size) {
        bool unique = true;
        for (std::size_t i = 0; i < data.points.size(); ++i) {
          if (i == idx) continue;
          if ((data.points[i] & mask) == (x & mask)) {
            unique = false;
            break;
          }
        }
        if (unique) return size;
      }
      if (mask == all) break;
    }
  }
  return data.d;  // unreachable: the full set always identifies
}

PidResult pid_length_boolean(const BooleanDataset& data, std::size_t idx) {
  const std::uint32_t x = data.points[idx];
  const std::uint32_t all = (data.d == 32) ? ~0u : ((1u << data.d) - 1u);

  // Minimizing |S| + log2(imp) equals minimizing 2^|S| * imp, which stays an
  // exact integer comparison for d <= 20.
  std::uint64_t best_key = std::numeric_limits<std::uint64_t>::max();
  std::uint32_t best_mask = 0;
  std::uint64_t best_imp = 0;
  int best_size = 0;
  for (std::uint32_t mask = 0;; ++mask) {
    const int size = std::popcount(mask);
    const std::uint64_t imp = count_agreeing(data, x, mask);
    const std::uint64_t key = imp << size;
    const bool better =
        key < best_key ||
        (key == best_key &&
         (size < best_size ||
          (size == best_size && lex_set_less(mask, best_mask))));
    if (better) {
      best_key = key;
      best_mask = mask;
      best_imp = imp;
      best_size = size;
    }
    if (mask == all) break;
  }
  PidResult res;
  res.length = static_cast<double>(best_size) +
               std::log2(static_cast<double>(best_imp));
  res.witness = mask_to_coords(best_mask);
  res.impostors = best_imp;
  return res;
}

double BooleanSparsity::value() const {
  return static_cast<double>(volume) / static_cast<double>(count);
}

double BooleanSparsity::log2_value() const {
  return std::log2(static_cast<double>(volume)) -
         std::log2(static_cast<double>(count));
}

BooleanSparsity max_boolean_subcube_sparsity(const BooleanDataset& data,
                                             std::size_t idx) {
  const std::uint32_t x = data.points[idx];
  const std::uint32_t all = (data.d == 32) ? ~0u : ((1u << data.d) - 1u);
  BooleanSparsity best;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 0;; ++mask) {
    const int size = std::popcount(mask);
    const std::uint64_t volume = 1ull << (data.d - size);
    const std::uint64_t count = count_agreeing(data, x, mask);
    // volume/count > best: exact via cross-multiplication.
    if (best.count == 0 || volume * best.count > best.volume * count) {
      best.volume = volume;
      best.count = count;
      best_mask = mask;
    }
    if (mask == all) break;
  }
  best.fixed_coords = mask_to_coords(best_mask);
  return best;
}

namespace {

struct DenseCandidate {
  double density = -std::numeric_limits<double>::infinity();
  std::size_t lo = 0;
  std::size_t hi = 0;
  bool valid = false;
};

// Strictly-better test with tolerance ties: shorter interval wins a tie,
// then the smaller start index.
bool dense_better(const DenseCandidate& cand, const DenseCandidate& inc) {
  if (!inc.valid) return true;
  const double scale =
      std::max({std::abs(cand.density), std::abs(inc.density), 1.0});
  const double diff = cand.density - inc.density;
  if (diff > kDensityTieTol * scale) return true;
  if (diff < -kDensityTieTol * scale) return false;
  const std::size_t clen = cand.hi - cand.lo;
  const std::size_t ilen = inc.hi - inc.lo;
  if (clen != ilen) return clen < ilen;
  return cand.lo < inc.lo;
}

std::vector<DensestResult> densest_scan(std::span<const double> a,
                                        std::span<const double> w) {
  const std::size_t n = a.size();
  if (n == 0) throw data_error("empty input");
  std::vector<double> pa(n + 1, 0.0), pw(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    pa[i + 1] = pa[i] + a[i];
    pw[i + 1] = pw[i] + w[i];
  }
  std::vector<DenseCandidate> best(n);
  for (std::size_t lo = 0; lo < n; ++lo) {
    DenseCandidate run;
    for (std::size_t end = n; end-- > lo;) {
      DenseCandidate cand;
      cand.density = (pa[end + 1] - pa[lo]) / (pw[end + 1] - pw[lo]);
      cand.lo = lo;
      cand.hi = end;
      cand.valid = true;
      if (dense_better(cand, run)) run = cand;
      // run now covers all intervals [lo, end'] with end' >= end, each of
      // which contains position `end`.
      if (dense_better(run, best[end])) best[end] = run;
    }
  }
  std::vector<DensestResult> out(n);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = {best[j].density, {best[j].lo, best[j].hi}};
  return out;
}

}  // namespace

std::vector<DensestResult> densest_interval_all(std::span<const double> a) {
  std::vector<double> unit(a.size(), 1.0);
  return densest_scan(a, unit);
}

std::vector<DensestResult> densest_interval_all_weighted(
    std::span<const double> a, std::span<const double> w) {
  if (a.size() != w.size()) throw std::invalid_argument("weight size mismatch");
  return densest_scan(a, w);
}

std::vector<ScoredInterval> pidscore_1d(std::span<const double> sorted_points) {
  const std::size_t n = sorted_points.size();
  if (n == 0) throw data_error("empty input");
  for (std::size_t i = 0; i < n; ++i) {
    if (sorted_points[i] < 0.0 || sorted_points[i] > 1.0)
      throw data_error("points must lie in [0,1]");
    if (i > 0 && sorted_points[i] < sorted_points[i - 1])
      throw std::invalid_argument("points must be sorted ascending");
  }

  // Collapse duplicates into weighted positions.
  std::vector<double> pos;
  std::vector<double> weight;
  std::vector<std::size_t> pos_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (pos.empty() || sorted_points[i] != pos.back()) {
      pos.push_back(sorted_points[i]);
      weight.push_back(0.0);
    }
    weight.back() += 1.0;
    pos_of[i] = pos.size() - 1;
  }
  const std::size_t m = pos.size();

  std::vector<double> endpoints(m + 1);
  endpoints[0] = 0.0;
  endpoints[m] = 1.0;
  for (std::size_t i = 0; i + 1 < m; ++i)
    endpoints[i + 1] = (pos[i] + pos[i + 1]) / 2.0;

  std::vector<double> gaps(m);
  for (std::size_t i = 0; i < m; ++i) gaps[i] = endpoints[i + 1] - endpoints[i];

  const auto dense = densest_interval_all_weighted(gaps, weight);

  std::vector<ScoredInterval> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const DensestResult& r = dense[pos_of[i]];
    out[i].log2_score = std::log2(r.density);
    out[i].lo = endpoints[r.interval.lo];
    out[i].hi = endpoints[r.interval.hi + 1];
  }
  return out;
}

std::vector<BruteforceScore> pidscore_bruteforce_all(const Dataset& data) {
  if (data.n == 0) throw data_error("empty input");
  if (data.d == 0 || data.d > 3)
    throw std::invalid_argument("use forest, oracle infeasible");
  for (const AttributeSpec& col : data.columns)
    if (col.is_categorical())
      throw std::invalid_argument("bruteforce oracle expects continuous data");
  for (const double v : data.values)
    if (v < 0.0 || v > 1.0) throw data_error("points must lie in [0,1]");

  // Candidate endpoints per coordinate: 0, 1, and midpoints of consecutive
  // distinct sorted values.
  std::vector<std::vector<double>> endpoints(data.d);
  for (std::size_t j = 0; j < data.d; ++j) {
    std::vector<double> vals(data.n);
    for (std::size_t i = 0; i < data.n; ++i) vals[i] = data.at(i, j);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    auto& e = endpoints[j];
    e.push_back(0.0);
    for (std::size_t i = 0; i + 1 < vals.size(); ++i)
      e.push_back((vals[i] + vals[i + 1]) / 2.0);
    e.push_back(1.0);
  }

  struct Best {
    double ratio = -1.0;
    std::vector<std::pair<double, double>> box;
  };
  std::vector<Best> best(data.n);
  std::vector<std::pair<double, double>> box(data.d);
  std::vector<std::size_t> inside;

  // Enumerates every candidate subcube once; each point inside keeps the
  // sparsest one seen.
  auto enumerate = [&](auto&& self, std::size_t coord) -> void {
    if (coord == data.d) {
      inside.clear();
      for (std::size_t i = 0; i < data.n; ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < data.d; ++j) {
          const double v = data.at(i, j);
          if (v < box[j].first || v > box[j].second) {
            ok = false;
            break;
          }
        }
        if (ok) inside.push_back(i);
      }
      if (inside.empty()) return;
      double vol = 1.0;
      for (std::size_t j = 0; j < data.d; ++j)
        vol *= box[j].second - box[j].first;
      const double ratio = vol / static_cast<double>(inside.size());
      for (const std::size_t i : inside) {
        if (ratio > best[i].ratio) {
          best[i].ratio = ratio;
          best[i].box = box;
        }
      }
      return;
    }
    const auto& e = endpoints[coord];
    for (std::size_t a = 0; a + 1 < e.size(); ++a) {
      for (std::size_t b = a + 1; b < e.size(); ++b) {
        box[coord] = {e[a], e[b]};
        self(self, coord + 1);
      }
    }
  };
  enumerate(enumerate, 0);

  std::vector<BruteforceScore> out(data.n);
  for (std::size_t i = 0; i < data.n; ++i) {
    out[i].log2_score = std::log2(best[i].ratio);
    std::vector<Interval> ivs;
    ivs.reserve(data.d);
    for (const auto& [lo, hi] : best[i].box)
      ivs.push_back(Interval::continuous(lo, hi));
    out[i].witness = Subcube::from_intervals(std::move(ivs));
  }
  return out;
}

BruteforceScore pidscore_bruteforce(const Dataset& data, std::size_t idx) {
  return pidscore_bruteforce_all(data).at(idx);
}

}  // namespace pidforest
