#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "coldstart/design.hpp"
#include "coldstart/selection.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace coldstart;

namespace {

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

RatingDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_ratings(in, RatingFormat::csv);
}

}  // namespace

TEST_CASE("budget equal to the pool returns the whole pool") {
  std::mt19937_64 rng(1);
  const RaterPool pool = oracle::make_pool(oracle::random_augmented(2, 9, rng), std::vector<double>(9, 0.2));
  const std::vector<std::size_t> all = pool.users;
  CHECK(sorted(bgs1(pool, 9, 1e-6).selected) == all);
  CHECK(sorted(bgs2(pool, 9, 1e-6).selected) == all);
  CHECK(sorted(forward_greedy(pool, 9, 1e-6).selected) == all);
  CHECK(sorted(random_select(pool, 9, 4).selected) == all);
  CHECK(bgs1(pool, 9, 1e-6).eliminated.empty());
  CHECK_THROWS_AS(bgs1(pool, 10, 1e-6), Error);
  CHECK_THROWS_AS(bgs1(pool, 0, 1e-6), Error);
}

TEST_CASE("a duplicated user is eliminated first") {
  // k+1 orthogonal users plus a copy of user 0.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 5);
  x.leftCols(4) = Eigen::MatrixXd::Identity(4, 4);
  x.col(4) = x.col(0);
  const SelectionResult r = bgs1(oracle::make_pool(x), 4, 4e-6);
  REQUIRE(r.eliminated.size() == 1);
  CHECK((r.eliminated[0] == 0 || r.eliminated[0] == 4));
  std::vector<std::size_t> without_twin = {1, 2, 3, 4}, without_other = {0, 2, 3, 4};
  CHECK(oracle::trace_inverse(x, without_twin, {}, 4e-6) < oracle::trace_inverse(x, without_other, {}, 4e-6));
}

TEST_CASE("weighted greedy with equal variances matches the unweighted one") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const RaterPool pool = oracle::make_pool(oracle::random_augmented(3, 30, rng), std::vector<double>(30, 0.36));
    for (std::size_t b : {4, 8, 15}) {
      CHECK(bgs2(pool, b, 1e-6).selected == bgs1(pool, b, 1e-6).selected);
    }
  }
  const RaterPool bare = oracle::make_pool(oracle::random_augmented(2, 5, rng));
  CHECK_THROWS_AS(bgs2(bare, 3, 1e-6), Error);
}

TEST_CASE("of two identical users the noisier one goes first") {
  std::mt19937_64 rng(4);
  Eigen::MatrixXd x = oracle::random_augmented(2, 8, rng);
  x.col(7) = x.col(2);
  std::vector<double> var(8, 0.25);
  var[2] = 0.64;
  var[7] = 0.04;
  const SelectionResult r = bgs2(oracle::make_pool(x, var), 7, 1e-6);
  CHECK(r.eliminated == std::vector<std::size_t>{2});
}

TEST_CASE("forward greedy with budget one takes the user of largest norm") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd x = oracle::random_augmented(3, 20, rng);
    Eigen::Index best = 0;
    x.colwise().squaredNorm().maxCoeff(&best);
    CHECK(forward_greedy(oracle::make_pool(x), 1, 1e-6).selected ==
          std::vector<std::size_t>{static_cast<std::size_t>(best)});
  }
  const RaterPool pool = oracle::make_pool(oracle::random_augmented(2, 5, rng));
  CHECK_THROWS_AS(forward_greedy(pool, 2, 0.0), Error);
}

TEST_CASE("incremental traces agree with from-scratch recomputation") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd x = oracle::random_augmented(4, 60, rng, 0.5);
  const RaterPool pool = oracle::make_pool(x);
  GreedyOptions options;
  options.ridge = 5e-6;
  options.refresh_interval = 1000;  // no refresh: the raw updates are tested
  const SelectionResult r = bgs1(pool, 5, options);
  REQUIRE(r.trajectory.size() == 55);
  std::vector<std::size_t> alive = pool.users;
  for (std::size_t step = 0; step < r.eliminated.size(); ++step) {
    alive.erase(std::find(alive.begin(), alive.end(), r.eliminated[step]));
    const double exact = oracle::trace_inverse(x, alive, {}, options.ridge);
    CHECK(oracle::relative_difference(r.trajectory[step], exact) < 1e-8);
  }
  CHECK(oracle::relative_difference(*r.objective, oracle::trace_inverse(x, r.selected, {}, options.ridge)) < 1e-10);

  const SelectionResult f = forward_greedy(pool, 10, options);
  std::vector<std::size_t> chosen;
  for (std::size_t step = 0; step < f.selected.size(); ++step) {
    chosen.push_back(f.selected[step]);
    CHECK(oracle::relative_difference(f.trajectory[step], oracle::trace_inverse(x, chosen, {}, options.ridge)) < 1e-8);
  }
}

TEST_CASE("each backward step removes the user of least trace increase") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd x = oracle::random_augmented(2, 12, rng);
  const double ridge = 3e-6;
  const SelectionResult r = bgs1(oracle::make_pool(x), 4, ridge);
  std::vector<std::size_t> alive(12);
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  for (std::size_t victim : r.eliminated) {
    double best = INFINITY;
    std::size_t arg = 0;
    for (std::size_t c : alive) {
      std::vector<std::size_t> rest;
      for (std::size_t o : alive)
        if (o != c) rest.push_back(o);
      const double v = oracle::trace_inverse(x, rest, {}, ridge);
      if (v < best) {
        best = v;
        arg = c;
      }
    }
    CHECK(victim == arg);
    alive.erase(std::find(alive.begin(), alive.end(), victim));
  }
}

TEST_CASE("greedy objective does not increase with the budget") {
  std::mt19937_64 rng(8);
  const RaterPool pool = oracle::make_pool(oracle::random_augmented(3, 40, rng));
  double previous = INFINITY;
  for (std::size_t b = 1; b <= 40; ++b) {
    const double v = *bgs1(pool, b, 4e-6).objective;
    CHECK(v <= previous * (1.0 + 1e-9));
    previous = v;
  }
}

TEST_CASE("brute force: exact optimum, lexicographic ties, never worse than greedy") {
  std::mt19937_64 rng(9);
  design::DesignObjective obj;
  obj.ridge = 3e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd x = oracle::random_augmented(2, 9, rng);
    const RaterPool pool = oracle::make_pool(x);
    const SelectionResult bf = brute_force_optimal(pool, 4, obj);
    double best = INFINITY;
    std::vector<std::size_t> arg;
    for (const auto& combo : oracle::combinations(9, 4)) {
      const double v = oracle::trace_inverse(x, combo, {}, obj.ridge);
      if (v < best * (1.0 - 1e-12)) {
        best = v;
        arg = combo;
      }
    }
    CHECK(bf.selected == arg);
    CHECK(oracle::relative_difference(*bf.objective, best) < 1e-9);
    CHECK(*bf.objective <= *bgs1(pool, 4, obj.ridge).objective * (1.0 + 1e-12));
  }
  const RaterPool big = oracle::make_pool(oracle::random_augmented(1, 60, rng));
  CHECK_THROWS_AS(brute_force_optimal(big, 30, obj), Error);
}

TEST_CASE("greedy selections are deterministic") {
  std::mt19937_64 rng(10);
  const RaterPool pool = oracle::make_pool(oracle::random_augmented(5, 200, rng), std::vector<double>(200, 0.1));
  CHECK(bgs1(pool, 12, 6e-6).selected == bgs1(pool, 12, 6e-6).selected);
  CHECK(forward_greedy(pool, 12, 6e-6).selected == forward_greedy(pool, 12, 6e-6).selected);
  CHECK(random_select(pool, 12, 3).selected == random_select(pool, 12, 3).selected);
  CHECK(random_select(pool, 12, 3).selected != random_select(pool, 12, 4).selected);
}

TEST_CASE("thinning keeps the users of largest norm") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 6);
  x.row(1) << 0.1, 5.0, 0.2, 4.0, 3.0, 0.3;
  GreedyOptions options;
  options.ridge = 1e-3;
  options.thinning_cap = 3;
  const SelectionResult r = bgs1(oracle::make_pool(x), 2, options);
  for (std::size_t u : r.selected) CHECK((u == 1 || u == 3 || u == 4));
}

TEST_CASE("random selection is uniform") {
  const std::size_t n = 20, b = 5, draws = 10000;
  std::mt19937_64 rng(11);
  const RaterPool pool = oracle::make_pool(oracle::random_augmented(1, n, rng));
  std::vector<std::size_t> hits(n, 0);
  for (std::size_t s = 0; s < draws; ++s) {
    const SelectionResult r = random_select(pool, b, s + 1);
    CHECK(std::set<std::size_t>(r.selected.begin(), r.selected.end()).size() == b);
    for (std::size_t u : r.selected) ++hits[u];
  }
  const double p = static_cast<double>(b) / n;
  const double mean = draws * p, sd = std::sqrt(draws * p * (1.0 - p));
  for (std::size_t u = 0; u < n; ++u) CHECK(std::abs(static_cast<double>(hits[u]) - mean) < 3.5 * sd);
}

TEST_CASE("cluster selection spreads over separated directions") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> jitter(0.0, 0.01);
  const std::size_t groups = 4, per = 15;
  Eigen::MatrixXd x(3, groups * per);
  for (std::size_t g = 0; g < groups; ++g) {
    const double angle = 2.0 * M_PI * static_cast<double>(g) / groups;
    for (std::size_t m = 0; m < per; ++m) {
      const auto c = static_cast<Eigen::Index>(g * per + m);
      x(0, c) = 1.0;
      x(1, c) = std::cos(angle) + jitter(rng);
      x(2, c) = std::sin(angle) + jitter(rng);
    }
  }
  const RaterPool pool = oracle::make_pool(x);
  ClusterOptions options;
  options.mode = ClusterMode::one_per_cluster;
  const SelectionResult r = cluster_select(pool, groups, options);
  std::set<std::size_t> covered;
  for (std::size_t u : r.selected) covered.insert(u / per);
  CHECK(covered.size() == groups);

  options.mode = ClusterMode::proportional;
  options.clusters = groups;
  const SelectionResult p = cluster_select(pool, 8, options);
  std::vector<int> per_group(groups, 0);
  for (std::size_t u : p.selected) ++per_group[u / per];
  for (int c : per_group) CHECK(c == 2);
}

TEST_CASE("a single cluster reduces to random selection over nonzero users") {
  const std::size_t n = 12, b = 3, draws = 6000;
  std::mt19937_64 rng(13);
  Eigen::MatrixXd x = oracle::random_augmented(2, n, rng);
  x.col(0).tail(2).setZero();
  const RaterPool pool = oracle::make_pool(x);
  ClusterOptions options;
  options.clusters = 1;
  std::vector<std::size_t> hits(n, 0);
  for (std::size_t s = 0; s < draws; ++s) {
    options.seed = s + 1;
    for (std::size_t u : cluster_select(pool, b, options).selected) ++hits[u];
  }
  CHECK(hits[0] == 0);
  const double p = static_cast<double>(b) / (n - 1);
  const double mean = draws * p, sd = std::sqrt(draws * p * (1.0 - p));
  for (std::size_t u = 1; u < n; ++u) CHECK(std::abs(static_cast<double>(hits[u]) - mean) < 3.5 * sd);
}

TEST_CASE("frequent, edgy, and early-bird raters match hand-ranked orders") {
  // u0: 4 ratings, variance 0; u1: 2 ratings {1,5}; u2: 3 ratings {2,3,4}; u3: none.
  const RatingDataset train = parse(
      "u0,a,3\nu0,b,3\nu0,c,3\nu0,d,3\n"
      "u1,a,1\nu1,b,5\n"
      "u2,a,2\nu2,b,3\nu2,c,4\n");
  const RatingDataset heldout = parse("u0,new,3,40\nu1,new,4,10\nu2,new,2,30\nu3,new,5,20\n");
  const RaterPool pool = oracle::make_pool(Eigen::MatrixXd::Ones(2, 4));

  CHECK(frequent_raters(pool, 3, train).selected == std::vector<std::size_t>{0, 2, 1});
  CHECK(edgy_raters(pool, 2, train).selected == std::vector<std::size_t>{1, 2});
  CHECK(early_birds(pool, 4, heldout).selected == std::vector<std::size_t>{1, 3, 2, 0});

  // Ties keep pool order.
  CHECK(edgy_raters(pool, 4, train).selected == std::vector<std::size_t>{1, 2, 0, 3});
  const RatingDataset partial = parse("u2,new,2,5\n");
  CHECK(early_birds(pool, 2, partial).selected == std::vector<std::size_t>{2, 0});
}

TEST_CASE("dispatch and method names") {
  std::mt19937_64 rng(14);
  const RaterPool pool = oracle::make_pool(oracle::random_augmented(2, 10, rng));
  SelectionRequest request;
  request.budget = 4;
  request.ridge = 3e-6;
  CHECK(select(pool, request).selected == bgs1(pool, 4, 3e-6).selected);
  request.method = SelectionMethod::frequent;
  CHECK_THROWS_AS(select(pool, request), Error);
  request.method = SelectionMethod::random;
  request.seed = 9;
  CHECK(select(pool, request).selected == random_select(pool, 4, 9).selected);
  for (auto m : {SelectionMethod::bgs1, SelectionMethod::bgs2, SelectionMethod::forward_greedy,
                 SelectionMethod::cluster, SelectionMethod::random, SelectionMethod::frequent,
                 SelectionMethod::edgy, SelectionMethod::early_birds, SelectionMethod::brute_force}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("oracle"), Error);
  CHECK(is_stochastic(SelectionMethod::random));
  CHECK_FALSE(is_stochastic(SelectionMethod::bgs1));
}
