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

#include "pidforest/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pidforest/common.hpp"

namespace pidforest {

namespace {

void check_two_classes(std::span<const double> scores,
                       std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("scores/labels size mismatch");
  if (scores.empty()) throw data_error("empty input");
  std::size_t pos = 0;
  for (const std::uint8_t l : labels) pos += (l != 0);
  if (pos == 0 || pos == labels.size()) throw data_error("AUC undefined");
}

// Indices ordered by descending score; equal scores keep input order.
std::vector<std::size_t> rank_descending(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return order;
}

}  // namespace

double auc(std::span<const double> scores,
           std::span<const std::uint8_t> labels) {
  check_two_classes(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mid-ranks over tie groups.
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        rank_sum_pos += mid_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  const double u = rank_sum_pos -
                   static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double top_fraction_accuracy(std::span<const double> scores,
                             std::span<const std::uint8_t> labels,
                             double fraction) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("scores/labels size mismatch");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("fraction must be in (0, 1]");
  if (scores.empty()) throw data_error("empty input");
  const auto top = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(scores.size())));
  const auto order = rank_descending(scores);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < top; ++i) hits += (labels[order[i]] != 0);
  return static_cast<double>(hits) / static_cast<double>(top);
}

double recall_at_fraction(std::span<const double> scores,
                          std::span<const std::uint8_t> labels,
                          double fraction) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("scores/labels size mismatch");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("fraction must be in (0, 1]");
  if (scores.empty()) throw data_error("empty input");
  std::size_t positives = 0;
  for (const std::uint8_t l : labels) positives += (l != 0);
  if (positives == 0) throw data_error("no labeled anomalies");
  const auto top = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(scores.size())));
  const auto order = rank_descending(scores);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < top; ++i) hits += (labels[order[i]] != 0);
  return static_cast<double>(hits) / static_cast<double>(positives);
}

std::vector<RocPoint> roc_points(std::span<const double> scores,
                                 std::span<const std::uint8_t> labels) {
  check_two_classes(scores, labels);
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (const std::uint8_t l : labels) n_pos += (l != 0);
  const std::size_t n_neg = n - n_pos;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<RocPoint> out;
  out.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]])
        ++tp;
      else
        ++fp;
    }
    out.push_back({scores[order[i]],
                   static_cast<double>(fp) / static_cast<double>(n_neg),
                   static_cast<double>(tp) / static_cast<double>(n_pos)});
    i = j;
  }
  return out;
}

}  // namespace pidforest
