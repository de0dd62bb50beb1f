#include <cmath>
#include <doctest.h>

#include "pidforest/core.hpp"
#include "test_util.hpp"

using namespace pidforest;
using testutil::make_column;
using testutil::make_continuous;

TEST_SUITE_BEGIN("core");

TEST_CASE("normalize maps observed range onto [0,1]") {
  const Dataset ds = make_column({2.0, 4.0, 6.0});
  const auto [norm, transform] = normalize(ds);
  CHECK(norm.at(0, 0) == 0.0);
  CHECK(norm.at(1, 0) == 0.5);
  CHECK(norm.at(2, 0) == 1.0);
  CHECK(transform.cols[0].min == 2.0);
  CHECK(transform.cols[0].span == 4.0);
  CHECK_FALSE(transform.cols[0].constant);
}

TEST_CASE("normalize maps constant columns to 0.5 and flags them") {
  const Dataset ds = make_column({7.0, 7.0, 7.0});
  const auto [norm, transform] = normalize(ds);
  for (std::size_t i = 0; i < 3; ++i) CHECK(norm.at(i, 0) == 0.5);
  CHECK(transform.cols[0].constant);
}

TEST_CASE("transform clips unseen values to [0,1]") {
  ColumnTransform ct;
  ct.min = 2.0;
  ct.span = 4.0;
  CHECK(ct.to_unit(10.0) == 1.0);
  CHECK(ct.to_unit(-3.0) == 0.0);
  CHECK(ct.to_unit(4.0) == 0.5);
}

TEST_CASE("normalize rejects degenerate input") {
  Dataset empty;
  empty.d = 1;
  empty.columns.resize(1);
  CHECK_THROWS_WITH_AS(normalize(empty), "empty input", data_error);

  Dataset no_cols;
  no_cols.n = 3;
  CHECK_THROWS_AS(normalize(no_cols), data_error);
}

TEST_CASE("log2 sparsity") {
  const std::vector<AttributeSpec> cols(3);
  const Subcube full = Subcube::full_cube(cols);
  CHECK(log2_sparsity(full, 1) == 0.0);

  const Subcube iv = Subcube::from_intervals({Interval::continuous(0.3, 0.7)});
  CHECK(log2_sparsity(iv, 1) == doctest::Approx(std::log2(0.4)).epsilon(1e-12));

  const Subcube two = Subcube::from_intervals(
      {Interval::continuous(0.0, 0.5), Interval::continuous(0.25, 0.75)});
  CHECK(log2_sparsity(two, 2) == doctest::Approx(-3.0).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(log2_sparsity(full, 0),
                       "empty cell has undefined sparsity",
                       std::invalid_argument);
}

TEST_CASE("degenerate subcubes are flagged and never scored") {
  const Subcube degen =
      Subcube::from_intervals({Interval::continuous(0.5, 0.5)});
  CHECK(degen.degenerate);
  CHECK_THROWS_AS(log2_sparsity(degen, 1), std::invalid_argument);
}

TEST_CASE("interval lengths") {
  CHECK(Interval::continuous(0.0, 1.0).length() == 1.0);
  CHECK(Interval::continuous(0.0, 1.0).is_full());
  CHECK(Interval::continuous(0.2, 0.7).length() == doctest::Approx(0.5));
  CHECK(Interval::categorical({0, 2}, 4).length() == 0.5);
  CHECK(Interval::categorical({0, 1, 2, 3}, 4).is_full());
  CHECK(Interval::categorical({1}, 4).contains(1.0));
  CHECK_FALSE(Interval::categorical({1}, 4).contains(2.0));
}

TEST_CASE("volume product law") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + rng.below(6);
    std::vector<Interval> ivs;
    double expected = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double a = rng.unit(), b = rng.unit();
      if (a > b) std::swap(a, b);
      b = std::max(b, a + 1e-6);
      if (b > 1.0) b = 1.0;
      ivs.push_back(Interval::continuous(a, b));
      expected += std::log2(b - a);
    }
    const Subcube cube = Subcube::from_intervals(std::move(ivs));
    CHECK(cube.log2_volume == doctest::Approx(expected).epsilon(1e-12));
    for (const Interval& iv : cube.intervals) {
      CHECK(iv.length() >= 0.0);
      CHECK(iv.length() <= 1.0);
    }
  }
}

TEST_CASE("ingestion is invariant under exact positive rescaling") {
  // Power-of-two scaling and integer affine maps are exact in floating
  // point, so the normalized values must match bit for bit.
  Rng rng(11);
  std::vector<std::vector<double>> rows(20, std::vector<double>(2));
  for (auto& row : rows) {
    row[0] = std::floor(rng.unit() * 100.0);
    row[1] = rng.unit();
  }
  const Dataset base = make_continuous(rows);

  SUBCASE("power-of-two scale") {
    auto scaled_rows = rows;
    for (auto& row : scaled_rows) {
      row[0] *= 1024.0;
      row[1] *= 0.0078125;  // 2^-7
    }
    const Dataset scaled = make_continuous(scaled_rows);
    const auto [norm_a, ta] = normalize(base);
    const auto [norm_b, tb] = normalize(scaled);
    CHECK(norm_a.values == norm_b.values);
  }

  SUBCASE("integer affine map on integer data") {
    auto mapped_rows = rows;
    for (auto& row : mapped_rows) row[0] = 3.0 * row[0] + 7.0;
    const Dataset mapped = make_continuous(mapped_rows);
    const auto [norm_a, ta] = normalize(base);
    const auto [norm_b, tb] = normalize(mapped);
    for (std::size_t i = 0; i < base.n; ++i)
      CHECK(norm_a.at(i, 0) == norm_b.at(i, 0));
  }
}

TEST_CASE("dataset validation catches bad codes and ranges") {
  Dataset ds;
  ds.n = 2;
  ds.d = 1;
  ds.columns.resize(1);
  ds.columns[0].kind = AttributeKind::kCategoricalUnordered;
  ds.columns[0].domain_size = 3;
  ds.values = {0.0, 5.0};
  CHECK_THROWS_AS(validate_dataset(ds), data_error);
  ds.values = {0.0, 2.0};
  CHECK_NOTHROW(validate_dataset(ds));
}

TEST_SUITE_END();
