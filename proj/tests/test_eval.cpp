#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <vector>

#include "pidforest/common.hpp"
#include "pidforest/eval.hpp"

using namespace pidforest;

namespace {

double trapezoid(const std::vector<RocPoint>& pts) {
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2.0;
  return area;
}

}  // namespace

TEST_SUITE_BEGIN("eval");

TEST_CASE("auc basics") {
  const std::vector<std::uint8_t> labels{1, 0, 1, 0};
  CHECK(auc(std::vector<double>{0.9, 0.1, 0.8, 0.2}, labels) == 1.0);
  CHECK(auc(std::vector<double>{0.5, 0.5, 0.5, 0.5}, labels) == 0.5);
  CHECK(auc(std::vector<double>{0.9, 0.8, 0.7, 0.1}, labels) ==
        doctest::Approx(0.75));
}

TEST_CASE("auc needs both classes") {
  CHECK_THROWS_WITH_AS(
      auc(std::vector<double>{1.0, 2.0}, std::vector<std::uint8_t>{1, 1}),
      "AUC undefined", data_error);
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  Rng rng(307);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 10 + rng.below(60);
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng.unit() * 4.0 - 2.0;
      labels[i] = rng.next() & 1u;
    }
    labels[0] = 0;
    labels[1] = 1;
    std::vector<double> warped(n);
    for (std::size_t i = 0; i < n; ++i)
      warped[i] = std::exp(scores[i]) + scores[i];
    CHECK(auc(scores, labels) == doctest::Approx(auc(warped, labels)).epsilon(1e-12));

    std::vector<double> negated(n);
    for (std::size_t i = 0; i < n; ++i) negated[i] = -scores[i];
    CHECK(auc(scores, labels) + auc(negated, labels) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("top fraction accuracy") {
  // 20 points; the top decile by score is exactly the labeled pair.
  std::vector<double> scores(20);
  std::vector<std::uint8_t> labels(20, 0);
  for (std::size_t i = 0; i < 20; ++i) scores[i] = static_cast<double>(i);
  labels[19] = labels[18] = 1;
  CHECK(top_fraction_accuracy(scores, labels, 0.1) == 1.0);
  CHECK(recall_at_fraction(scores, labels, 0.1) == 1.0);
  labels[18] = 0;
  labels[0] = 1;
  CHECK(top_fraction_accuracy(scores, labels, 0.1) == 0.5);
  CHECK(recall_at_fraction(scores, labels, 0.1) == 0.5);
}

TEST_CASE("random scores recover the anomaly rate on average") {
  Rng rng(311);
  const std::size_t n = 400;
  const double rate = 0.2;
  double mean = 0.0;
  const int trials = 60;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n, 0);
    for (auto& s : scores) s = rng.unit();
    for (std::size_t i = 0; i < n; ++i) labels[i] = rng.unit() < rate;
    labels[0] = 1;
    labels[1] = 0;
    mean += top_fraction_accuracy(scores, labels, 0.05);
  }
  mean /= trials;
  CHECK(mean == doctest::Approx(rate).epsilon(0.25));
}

TEST_CASE("roc staircase endpoints and ties") {
  const std::vector<std::uint8_t> labels{1, 1, 0, 0};
  const auto perfect = roc_points(std::vector<double>{4, 3, 2, 1}, labels);
  REQUIRE(perfect.size() >= 3);
  CHECK(perfect.front().fpr == 0.0);
  CHECK(perfect.front().tpr == 0.0);
  CHECK(perfect[2].tpr == 1.0);
  CHECK(perfect.back().fpr == 1.0);
  CHECK(perfect.back().tpr == 1.0);

  const auto ties = roc_points(std::vector<double>{1, 1, 1, 1}, labels);
  REQUIRE(ties.size() == 2);
  CHECK(ties[1].fpr == 1.0);
  CHECK(ties[1].tpr == 1.0);
}

TEST_CASE("trapezoid area under roc equals rank auc") {
  Rng rng(313);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng.below(100);
    std::vector<double> scores(n);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng.below(12);  // heavy ties
      labels[i] = rng.next() & 1u;
    }
    labels[0] = 0;
    labels[1] = 1;
    CHECK(trapezoid(roc_points(scores, labels)) ==
          doctest::Approx(auc(scores, labels)).epsilon(1e-12));
  }
}

TEST_SUITE_END();
