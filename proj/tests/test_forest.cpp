#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <numeric>
#include <thread>
#include <vector>

#include "pidforest/data.hpp"
#include "pidforest/eval.hpp"
#include "pidforest/forest.hpp"
#include "pidforest/oracle.hpp"
#include "test_util.hpp"

using namespace pidforest;
using testutil::make_column;
using testutil::make_continuous;

namespace {

HyperParams small_params(std::uint64_t seed = 0) {
  HyperParams p;
  p.num_trees = 20;
  p.samples_per_tree = 50;
  p.rng_seed = seed;
  return p;
}

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& row : rows)
    for (auto& v : row) v = rng.unit() * 10.0 - 3.0;
  return make_continuous(rows);
}

void check_tree_invariants(const Tree& tree) {
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& node = tree.nodes[i];
    if (node.is_leaf()) {
      // Leaf-score law, exact.
      CHECK(node.log2_sparsity ==
            node.log2_volume - std::log2(static_cast<double>(node.count)));
      continue;
    }
    REQUIRE(node.num_children >= 2);
    std::uint64_t count = 0;
    double volume_ratio = 0.0;
    for (std::size_t c = 0; c < node.num_children; ++c) {
      const TreeNode& child = tree.nodes[node.first_child + c];
      CHECK(child.depth == node.depth + 1);
      CHECK(child.count >= 1);
      count += child.count;
      volume_ratio += std::exp2(child.log2_volume - node.log2_volume);
    }
    // Children partition the sample and tile the parent volume.
    CHECK(count == node.count);
    CHECK(volume_ratio == doctest::Approx(1.0).epsilon(1e-9));
  }
}

}  // namespace

TEST_SUITE_BEGIN("forest");

TEST_CASE("hyperparameter validation") {
  HyperParams p;
  CHECK_NOTHROW(p.validate());
  p.max_degree = 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.max_degree = 17;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.max_degree = 3;
  p.samples_per_tree = 1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("percentile interpolation") {
  CHECK(interpolated_percentile({5, 5, 5, 5}, 0.75) == 5.0);
  CHECK(interpolated_percentile({1, 2, 3, 4}, 0.75) == doctest::Approx(3.25));
  CHECK(interpolated_percentile({4, 2, 1, 3}, 0.75) == doctest::Approx(3.25));
  CHECK(interpolated_percentile({7}, 0.75) == 7.0);
  CHECK_THROWS_AS(interpolated_percentile({}, 0.75), std::invalid_argument);
}

TEST_CASE("path length completion") {
  CHECK(average_path_length(0) == 0.0);
  CHECK(average_path_length(1) == 0.0);
  CHECK(average_path_length(2) == doctest::Approx(1.0));
  CHECK(average_path_length(3) == doctest::Approx(3.0 - 4.0 / 3.0));
}

TEST_CASE("a one-point dataset yields single-leaf trees with score zero") {
  const Dataset ds = make_continuous({{4.0, 2.0}});
  const Forest forest = fit(ds, small_params());
  for (const Tree& tree : forest.trees) {
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].is_leaf());
    CHECK(tree.nodes[0].log2_sparsity == 0.0);
  }
  const auto scores = score(forest, ds);
  CHECK(scores[0] == 0.0);
}

TEST_CASE("identical rows with no splittable column are rejected") {
  const Dataset ds = make_continuous({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}});
  CHECK_THROWS_WITH_AS(fit(ds, small_params()), "no usable attributes",
                       data_error);
}

TEST_CASE("equal seeds give structurally identical forests") {
  Rng rng(101);
  const Dataset ds = random_dataset(rng, 200, 3);
  const Forest a = fit(ds, small_params(42));
  const Forest b = fit(ds, small_params(42));
  CHECK(serialize(a) == serialize(b));
  const Forest c = fit(ds, small_params(43));
  CHECK(serialize(a) != serialize(c));
}

TEST_CASE("thread count does not change the result") {
  Rng rng(103);
  const Dataset ds = random_dataset(rng, 300, 4);
  const Forest serial = fit(ds, small_params(7), 1);
  const Forest parallel = fit(ds, small_params(7), 3);
  CHECK(serialize(serial) == serialize(parallel));
}

TEST_CASE("tree invariants hold on random data") {
  Rng rng(107);
  for (int trial = 0; trial < 5; ++trial) {
    const Dataset ds = random_dataset(rng, 150, 3);
    const Forest forest = fit(ds, small_params(trial));
    for (const Tree& tree : forest.trees) check_tree_invariants(tree);
  }
}

TEST_CASE("single-tree scores equal the leaf sparsity") {
  Rng rng(109);
  const Dataset ds = random_dataset(rng, 80, 2);
  HyperParams p = small_params(5);
  p.num_trees = 1;
  const Forest forest = fit(ds, p);
  const auto scores = score(forest, ds);
  const auto reports = score_with_witness(forest, ds);
  for (std::size_t i = 0; i < ds.n; ++i) {
    CHECK(reports[i].witness_tree == 0);
    CHECK(scores[i] == reports[i].score);
  }
}

TEST_CASE("masking: duplicated zeros outscore the median corner point") {
  for (const std::size_t m : {std::size_t{64}, std::size_t{256}, std::size_t{1000}}) {
    const Dataset ds = gen_masking(1234);
    HyperParams p;
    p.samples_per_tree = m;
    p.rng_seed = 99;
    const Forest forest = fit(ds, p);
    const auto scores = score(forest, ds);

    std::vector<double> corner_scores(scores.begin(), scores.begin() + 970);
    std::sort(corner_scores.begin(), corner_scores.end());
    const double median_corner = corner_scores[485];
    for (std::size_t i = 970; i < 1000; ++i) {
      CHECK(scores[i] > median_corner);
    }
  }
}

TEST_CASE("scaling a column by a power of two leaves scores bit-identical") {
  Rng rng(113);
  auto rows = std::vector<std::vector<double>>(120, std::vector<double>(2));
  for (auto& row : rows)
    for (auto& v : row) v = rng.unit() * 4.0 - 2.0;
  const Dataset base = make_continuous(rows);
  for (auto& row : rows) row[0] *= 4096.0;
  const Dataset scaled = make_continuous(rows);

  const Forest fa = fit(base, small_params(21));
  const Forest fb = fit(scaled, small_params(21));
  const auto sa = score(fa, base);
  const auto sb = score(fb, scaled);
  CHECK(sa == sb);
}

TEST_CASE("witness ranges contain the point in original units") {
  Rng rng(127);
  const Dataset ds = random_dataset(rng, 120, 3);
  const Forest forest = fit(ds, small_params(3));

  // Larger-spread queries exercise the clipping path as well.
  std::vector<std::vector<double>> qrows(40, std::vector<double>(3));
  for (auto& row : qrows)
    for (auto& v : row) v = rng.unit() * 30.0 - 15.0;
  Dataset queries = make_continuous(qrows);
  queries.columns = ds.columns;  // same schema, wider raw values
  const auto reports = score_with_witness(forest, queries);
  for (std::size_t i = 0; i < queries.n; ++i) {
    for (const WitnessRange& r : reports[i].ranges) {
      REQUIRE_FALSE(r.categorical);
      const double x = queries.at(i, r.coord);
      CHECK(x >= r.lo);
      CHECK(x <= r.hi);
      CHECK(r.log2_length < 0.0);
    }
    // Most-constrained ranges come first.
    for (std::size_t w = 1; w < reports[i].ranges.size(); ++w)
      CHECK(reports[i].ranges[w - 1].log2_length <=
            reports[i].ranges[w].log2_length);
  }
}

TEST_CASE("serialize and deserialize round-trip bit-identically") {
  Rng rng(131);
  const Dataset ds = random_dataset(rng, 150, 3);
  const Forest forest = fit(ds, small_params(17));
  const std::string doc = serialize(forest);
  const Forest restored = deserialize(doc);
  CHECK(serialize(restored) == doc);

  const Dataset batch = random_dataset(rng, 60, 3);
  Dataset queries = batch;
  queries.columns = ds.columns;
  const auto sa = score(forest, queries);
  const auto sb = score(restored, queries);
  CHECK(sa == sb);
}

TEST_CASE("deserialize rejects broken documents") {
  Rng rng(137);
  const Dataset ds = random_dataset(rng, 50, 2);
  const Forest forest = fit(ds, small_params(1));
  const std::string doc = serialize(forest);

  CHECK_THROWS_AS(deserialize(doc.substr(0, doc.size() / 2)), data_error);

  std::string wrong_version = doc;
  const auto at = wrong_version.find("\"version\": 1");
  REQUIRE(at != std::string::npos);
  wrong_version.replace(at, 12, "\"version\": 9");
  CHECK_THROWS_WITH_AS(deserialize(wrong_version), "unsupported version",
                       schema_error);

  CHECK_THROWS_AS(deserialize("{\"format\": \"something-else\"}"),
                  schema_error);
}

TEST_CASE("schema mismatches are rejected at scoring time") {
  Rng rng(139);
  const Dataset ds = random_dataset(rng, 60, 3);
  const Forest forest = fit(ds, small_params(2));
  const Dataset narrow = random_dataset(rng, 10, 2);
  CHECK_THROWS_AS(score(forest, narrow), schema_error);

  Dataset renamed = random_dataset(rng, 10, 3);
  renamed.columns[1].name = "other";
  CHECK_THROWS_AS(score(forest, renamed), schema_error);
}

TEST_CASE("depth scoring is exposed and differs from sparsity") {
  const Dataset ds = gen_masking(7);
  const Forest forest = fit(ds, small_params(3));
  const auto by_sparsity = score(forest, ds, ScoreBy::kSparsity);
  const auto by_depth = score(forest, ds, ScoreBy::kDepth);
  CHECK(by_sparsity != by_depth);
  // Depth scores are negated isolation path lengths, so they are never
  // positive; sparsity scores are log2 sparsities.
  for (const double s : by_depth) CHECK(s <= 0.0);
}

TEST_CASE("forest scores track the exact 1-d oracle ranking") {
  // Clumpy data with stragglers; the exact densest-interval scores are the
  // ground truth the ensemble is approximating.
  for (const std::uint64_t seed : {1ull, 5ull, 8ull}) {
    Rng rng(seed);
    const std::size_t n = 400;
    std::vector<double> pts;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = rng.unit();
      if (u < 0.45)
        pts.push_back(0.25 + 0.05 * rng.normal());
      else if (u < 0.9)
        pts.push_back(0.7 + 0.04 * rng.normal());
      else
        pts.push_back(rng.unit());
    }
    for (auto& v : pts) v = std::min(1.0, std::max(0.0, v));
    std::sort(pts.begin(), pts.end());
    const auto oracle = pidscore_1d(pts);

    Dataset ds;
    ds.n = n;
    ds.d = 1;
    ds.columns.resize(1);
    ds.values = pts;
    refresh_observed_bounds(ds);
    HyperParams p;
    p.rng_seed = seed;
    const auto forest_scores = score(fit(ds, p), ds);

    const auto ranks = [](const std::vector<double>& v) {
      std::vector<std::size_t> o(v.size());
      std::iota(o.begin(), o.end(), std::size_t{0});
      std::stable_sort(o.begin(), o.end(),
                       [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
      std::vector<double> r(v.size());
      for (std::size_t i = 0; i < o.size(); ++i)
        r[o[i]] = static_cast<double>(i);
      return r;
    };
    std::vector<double> oracle_scores(n);
    for (std::size_t i = 0; i < n; ++i) oracle_scores[i] = oracle[i].log2_score;
    const auto ra = ranks(oracle_scores);
    const auto rb = ranks(forest_scores);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
    const double nn = static_cast<double>(n);
    const double spearman = 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
    CHECK(spearman > 0.6);
  }
}

TEST_CASE("a fitted forest can be scored from several threads") {
  Rng rng(151);
  const Dataset ds = random_dataset(rng, 300, 3);
  const Forest forest = fit(ds, small_params(9));
  const auto serial = score(forest, ds);

  std::vector<double> a, b;
  std::thread ta([&] { a = score(forest, ds); });
  std::thread tb([&] { b = score(forest, ds); });
  ta.join();
  tb.join();
  CHECK(a == serial);
  CHECK(b == serial);
}

TEST_CASE("categorical columns split and route") {
  // One continuous column plus an ordered month-like column and an unordered
  // code column with a rare value.
  Rng rng(149);
  Dataset ds;
  ds.n = 240;
  ds.d = 3;
  ds.columns.resize(3);
  ds.columns[0].name = "value";
  ds.columns[1] = {AttributeKind::kCategoricalOrdered, "month", 0, 0, 12};
  ds.columns[2] = {AttributeKind::kCategoricalUnordered, "kind", 0, 0, 5};
  for (std::size_t i = 0; i < ds.n; ++i) {
    ds.values.push_back(rng.unit());
    ds.values.push_back(static_cast<double>(rng.below(6)));  // months 0-5 only
    ds.values.push_back(i < 235 ? static_cast<double>(rng.below(3)) : 4.0);
  }
  refresh_observed_bounds(ds);

  HyperParams p = small_params(11);
  const Forest forest = fit(ds, p);
  for (const Tree& tree : forest.trees) check_tree_invariants(tree);

  const auto reports = score_with_witness(forest, ds);
  for (std::size_t i = 0; i < ds.n; ++i) {
    for (const WitnessRange& r : reports[i].ranges) {
      if (!r.categorical) continue;
      const auto code = static_cast<std::uint32_t>(ds.at(i, r.coord));
      CHECK(std::find(r.codes.begin(), r.codes.end(), code) != r.codes.end());
    }
  }
}

TEST_SUITE_END();
