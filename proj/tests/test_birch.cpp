#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "workload/birch.hpp"

using namespace wl::birch;

namespace {
Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("cf_from_point") {
  auto e = cf_from_point(vec2(3, 4));
  CHECK(e.n == 1);
  CHECK(e.ls == vec2(3, 4));
  CHECK(e.ss == doctest::Approx(25));
  CHECK(cf_centroid(e) == vec2(3, 4));

  auto zero = cf_from_point(vec2(0, 0));
  CHECK(zero.ss == 0);
}

TEST_CASE("cf_merge additivity and identity") {
  auto a = cf_from_point(vec2(1, 2));
  auto b = cf_from_point(vec2(3, -1));
  auto merged = cf_merge(a, b);
  CHECK(merged.n == 2);
  CHECK(merged.ls == vec2(4, 1));
  CHECK(merged.ss == doctest::Approx(5 + 10));

  CfEntry empty;
  auto same = cf_merge(a, empty);
  CHECK(same.n == a.n);
  CHECK(same.ls == a.ls);

  // identical points keep radius 0
  auto many = a;
  for (int i = 0; i < 5; ++i) many = cf_merge(many, a);
  CHECK(cf_radius(many) == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("derived statistics") {
  auto e = cf_merge(cf_from_point(vec2(0, 0)), cf_from_point(vec2(2, 0)));
  CHECK(cf_centroid(e) == vec2(1, 0));
  CHECK(cf_radius(e) == doctest::Approx(1));
  CHECK(cf_distance(e, e) == 0);
  CHECK(cf_radius(cf_from_point(vec2(5, 5))) == 0);
  CfEntry empty;
  CHECK_THROWS_AS(cf_centroid(empty), std::invalid_argument);
}

TEST_CASE("insert with zero threshold keeps points distinct") {
  CfTree tree(2, 4, 4, 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  std::set<std::pair<double, double>> points;
  for (int i = 0; i < 50; ++i) {
    double a = u(rng), b = u(rng);
    points.insert({a, b});
    tree.insert(vec2(a, b));
  }
  auto entries = tree.leaf_entries();
  CHECK(entries.size() == points.size());
  std::set<std::pair<double, double>> centroids;
  for (const auto& e : entries) {
    auto c = cf_centroid(e);
    centroids.insert({c(0), c(1)});
  }
  CHECK(centroids == points);
}

TEST_CASE("repeated point absorbs at positive threshold") {
  CfTree tree(2, 4, 4, 0.5);
  tree.insert(vec2(1, 1));
  tree.insert(vec2(1, 1));
  auto entries = tree.leaf_entries();
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].n == 2);
}

TEST_CASE("insert rejects wrong dimensions") {
  CfTree tree(2, 4, 4, 0.0);
  Eigen::VectorXd bad(3);
  bad.setZero();
  CHECK_THROWS_AS(tree.insert(bad), std::invalid_argument);
}

TEST_CASE("randomized structural invariants") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> bf(3, 8), lf(3, 8);
    const int branching = bf(rng), leaf_cap = lf(rng);
    const double threshold = trial % 2 == 0 ? 0.0 : 0.4;
    CfTree tree(3, branching, leaf_cap, threshold);
    const int n = 400;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(3);
    double ss = 0;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd x(3);
      x << u(rng), u(rng), u(rng);
      sum += x;
      ss += x.squaredNorm();
      tree.insert(x);
    }

    auto entries = tree.leaf_entries();
    long total = 0;
    CfEntry acc;
    for (const auto& e : entries) {
      total += e.n;
      acc = cf_merge(acc, e);
      REQUIRE(cf_radius(e) <= threshold + 1e-12);
      // Cauchy-Schwarz invariant
      REQUIRE(e.ss * static_cast<double>(e.n) >=
              e.ls.squaredNorm() * (1 - 1e-9) - 1e-12);
    }
    REQUIRE(total == n);
    auto root = tree.root_entry();
    REQUIRE(root.n == n);
    REQUIRE((root.ls - sum).norm() <= 1e-9 * std::max(1.0, sum.norm()));
    REQUIRE(root.ss == doctest::Approx(ss).epsilon(1e-9));
    REQUIRE((acc.ls - root.ls).norm() <= 1e-9 * std::max(1.0, sum.norm()));

    auto stats = tree.stats();
    REQUIRE(stats.leaves_same_depth);
    REQUIRE(stats.max_internal_occupancy <= branching);
    REQUIRE(stats.max_leaf_occupancy <= leaf_cap);
  }
}

TEST_CASE("insertion-order robustness at zero threshold") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Eigen::VectorXd> points;
  for (int i = 0; i < 60; ++i) points.push_back(vec2(u(rng), u(rng)));

  auto centroid_set = [&](const std::vector<Eigen::VectorXd>& pts) {
    CfTree tree(2, 5, 5, 0.0);
    for (const auto& p : pts) tree.insert(p);
    std::set<std::pair<double, double>> out;
    for (const auto& e : tree.leaf_entries()) {
      auto c = cf_centroid(e);
      out.insert({c(0), c(1)});
    }
    return out;
  };

  auto reference = centroid_set(points);
  for (int perm = 0; perm < 5; ++perm) {
    std::shuffle(points.begin(), points.end(), rng);
    REQUIRE(centroid_set(points) == reference);
  }
}

TEST_CASE("global_cluster on the 1-D hand case") {
  std::vector<CfEntry> entries;
  for (double v : {0.0, 1.0, 10.0, 11.0}) {
    Eigen::VectorXd x(1);
    x << v;
    entries.push_back(cf_from_point(x));
  }
  auto dend = global_cluster(entries);
  REQUIRE(dend.merges.size() == 3);
  CHECK(dend.merges[0].left == 0);
  CHECK(dend.merges[0].right == 1);
  CHECK(dend.merges[0].distance == doctest::Approx(1));
  CHECK(dend.merges[1].left == 2);
  CHECK(dend.merges[1].right == 3);
  CHECK(dend.merges[1].distance == doctest::Approx(1));
  CHECK(dend.merges[2].distance == doctest::Approx(10.0));

  auto labels = cut(dend, 2);
  CHECK(labels == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("single entry dendrogram") {
  std::vector<CfEntry> entries = {cf_from_point(vec2(1, 2))};
  auto dend = global_cluster(entries);
  CHECK(dend.merges.empty());
  CHECK(cut(dend, 1) == std::vector<int>{0});
  CHECK_THROWS_AS(global_cluster(std::vector<CfEntry>{}), std::invalid_argument);
}

TEST_CASE("global_cluster matches the brute-force oracle") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 15; ++trial) {
    std::uniform_int_distribution<int> nd(2, 120), dd(1, 5), wd(1, 6);
    const int n = nd(rng), d = dd(rng);
    std::uniform_real_distribution<double> u(-3, 3);
    std::vector<CfEntry> entries;
    Eigen::MatrixXd centroids(n, d);
    std::vector<double> weights;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd x(d);
      for (int j = 0; j < d; ++j) x(j) = u(rng);
      const int w = wd(rng);
      CfEntry e{w, x * static_cast<double>(w),
                x.squaredNorm() * static_cast<double>(w)};
      entries.push_back(e);
      centroids.row(i) = x.transpose();
      weights.push_back(w);
    }
    auto dend = global_cluster(entries);
    auto expected = oracle::agglomerative(centroids, weights);
    REQUIRE(dend.merges.size() == expected.size());
    for (std::size_t m = 0; m < expected.size(); ++m) {
      REQUIRE(dend.merges[m].left == expected[m].left);
      REQUIRE(dend.merges[m].right == expected[m].right);
      REQUIRE(dend.merges[m].distance == doctest::Approx(expected[m].distance).epsilon(1e-9));
    }
    // every cut matches up to label permutation
    std::uniform_int_distribution<int> kd(1, n);
    for (int rep = 0; rep < 4; ++rep) {
      const int k = kd(rng);
      REQUIRE(oracle::same_partition(cut(dend, k), oracle::cut_merges(n, expected, k)));
    }
  }
}

TEST_CASE("cut edge cases") {
  std::vector<CfEntry> entries;
  for (int i = 0; i < 6; ++i) entries.push_back(cf_from_point(vec2(i, 0)));
  auto dend = global_cluster(entries);
  auto all = cut(dend, 6);
  std::set<int> distinct(all.begin(), all.end());
  CHECK(distinct.size() == 6);
  auto one = cut(dend, 1);
  CHECK(std::all_of(one.begin(), one.end(), [](int l) { return l == 0; }));
  CHECK_THROWS_AS(cut(dend, 0), std::invalid_argument);
  CHECK_THROWS_AS(cut(dend, 7), std::invalid_argument);
}

TEST_CASE("assign maps points through leaf entries") {
  std::vector<CfEntry> entries = {cf_from_point(vec2(0, 0)), cf_from_point(vec2(10, 0))};
  std::vector<int> labels = {0, 1};
  Eigen::MatrixXd points(3, 2);
  points << 0, 0, 9.5, 0, 5, 0;  // last is equidistant -> lowest entry index
  auto out = assign(points, labels, entries);
  CHECK(out == std::vector<int>{0, 1, 0});
}

TEST_CASE("assign agrees with cut labels when entries are the points") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  const int n = 40;
  Eigen::MatrixXd points(n, 2);
  CfTree tree(2, 6, 6, 0.0);
  for (int i = 0; i < n; ++i) {
    points(i, 0) = u(rng);
    points(i, 1) = u(rng);
    tree.insert(points.row(i).transpose());
  }
  auto entries = tree.leaf_entries();
  REQUIRE(entries.size() == static_cast<std::size_t>(n));
  auto dend = global_cluster(entries);
  auto entry_labels = cut(dend, 5);
  auto point_labels = assign(points, entry_labels, entries);
  // entry i is exactly the i-th inserted point? order may differ; compare sets
  for (int i = 0; i < n; ++i) {
    int e = tree.nearest_leaf_entry(points.row(i).transpose());
    REQUIRE(point_labels[static_cast<std::size_t>(i)] ==
            entry_labels[static_cast<std::size_t>(e)]);
  }
}

TEST_CASE("estimate_threshold is the median nn distance") {
  Eigen::MatrixXd points(4, 1);
  points << 0, 1, 10, 12;
  // nn distances: 1, 1, 2, 2 -> median (upper) 2
  CHECK(estimate_threshold(points) == doctest::Approx(2.0));
}
