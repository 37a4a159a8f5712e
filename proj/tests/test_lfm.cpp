#include <algorithm>
#include <random>
#include <sstream>

#include "coldstart/lfm.hpp"
#include "coldstart/synthetic.hpp"
#include "doctest.h"

using namespace coldstart;

namespace {

RatingDataset rank_one_noiseless(std::uint64_t seed) {
  SyntheticConfig c;
  c.n_users = 60;
  c.n_items = 40;
  c.k = 1;
  c.raters_per_item = 30;
  c.sigma = 1e-9;
  c.seed = seed;
  return generate_synthetic(c).dataset;
}

}  // namespace

TEST_CASE("rank-one noiseless data is fitted closely") {
  TrainConfig config;
  config.k = 1;
  config.epochs = 200;
  config.l2_penalty = 0.0;
  std::vector<double> rmse;
  train_lfm(rank_one_noiseless(2), config, &rmse);
  REQUIRE(rmse.size() == 200);
  CHECK(rmse.back() < 0.05);
  CHECK(rmse.back() <= rmse.front() + 1e-9);
}

TEST_CASE("constant ratings give mu and near-zero parameters") {
  DatasetBuilder b;
  for (int u = 0; u < 20; ++u) {
    for (int i = 0; i < 10; ++i) b.add("u" + std::to_string(u), "i" + std::to_string(i), 3.0);
  }
  TrainConfig config;
  config.k = 2;
  config.epochs = 50;
  const LatentModel m = train_lfm(std::move(b).build(), config);
  CHECK(m.mu == doctest::Approx(3.0));
  CHECK(m.user_bias.cwiseAbs().maxCoeff() < 1e-4);
  CHECK(m.item_bias.cwiseAbs().maxCoeff() < 1e-4);
  for (std::size_t u = 0; u < m.user_count(); ++u) {
    for (std::size_t i = 0; i < m.item_count(); ++i) CHECK(std::abs(predict(m, u, i) - 3.0) < 0.01);
  }
}

TEST_CASE("training is deterministic and k = 20 gives 21-dimensional augmented vectors") {
  TrainConfig config;
  config.k = 20;
  config.epochs = 3;
  const RatingDataset d = rank_one_noiseless(3);
  const LatentModel a = train_lfm(d, config);
  const LatentModel b = train_lfm(d, config);
  CHECK(a.user_factors == b.user_factors);
  CHECK(a.item_factors == b.item_factors);
  CHECK(a.user_bias == b.user_bias);
  CHECK(augment(a, 0).size() == 21);
}

TEST_CASE("training rejects an empty dataset") {
  CHECK_THROWS_AS(train_lfm(RatingDataset{}, TrainConfig{}), Error);
}

TEST_CASE("divergence is reported") {
  DatasetBuilder b(parse_scale("-1e300:1e300"));
  b.add("u", "i", 1e300);
  b.add("v", "i", -1e300);
  TrainConfig config;
  config.k = 1;
  config.base_learning_rate = 1e300;
  CHECK_THROWS_AS(train_lfm(std::move(b).build(), config), Error);
}

TEST_CASE("predict: arithmetic, zero model, dot-product oracle") {
  IdIndex users, items;
  users.intern("u");
  items.intern("i");
  LatentModel m(users, items, 2, 3.0);
  CHECK(predict(m, 0, 0) == 3.0);
  m.user_bias(0) = 0.5;
  m.item_bias(0) = -0.2;
  m.user_factors.col(0) << 1.0, 0.5;
  m.item_factors.col(0) << 0.2, 0.2;
  CHECK(predict(m, 0, 0) == doctest::Approx(3.6));
  CHECK_THROWS_AS(predict(m, 1, 0), Error);
  CHECK_THROWS_AS(predict(m, 0, 1), Error);

  SyntheticConfig c;
  c.n_users = 30;
  c.n_items = 30;
  c.raters_per_item = 5;
  c.k = 4;
  const LatentModel truth = generate_synthetic(c).truth;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> pick(0, 29);
  for (int n = 0; n < 100; ++n) {
    const std::size_t u = pick(rng), i = pick(rng);
    double dot = 0.0;
    for (Eigen::Index f = 0; f < 4; ++f) dot += truth.user_factors(f, static_cast<Eigen::Index>(u)) * truth.item_factors(f, static_cast<Eigen::Index>(i));
    const double expected = truth.mu + truth.user_bias(static_cast<Eigen::Index>(u)) + truth.item_bias(static_cast<Eigen::Index>(i)) + dot;
    CHECK(std::abs(predict(truth, u, i) - expected) < 1e-12);
  }
}

TEST_CASE("augment prepends a one") {
  IdIndex users, items;
  users.intern("a");
  users.intern("b");
  items.intern("i");
  LatentModel m(users, items, 2, 3.0);
  CHECK(augment(m, 0) == Eigen::Vector3d(1, 0, 0));
  m.user_factors.col(1) << 2, -1;
  CHECK(augment(m, 1) == Eigen::Vector3d(1, 2, -1));
  CHECK_THROWS_AS(augment(m, 2), Error);

  SyntheticConfig c;
  c.n_users = 50;
  c.n_items = 2;
  c.raters_per_item = 2;
  const LatentModel truth = generate_synthetic(c).truth;
  for (std::size_t u = 0; u < 50; ++u) {
    const auto v = augment(truth, u);
    CHECK(v(0) == 1.0);
    CHECK(v.squaredNorm() == doctest::Approx(1.0 + truth.user_factors.col(static_cast<Eigen::Index>(u)).squaredNorm()));
  }
}

TEST_CASE("user variances: floor, exact residuals, fallback") {
  IdIndex users, items;
  users.intern("exact");
  users.intern("noisy");
  users.intern("sparse");
  for (int i = 0; i < 4; ++i) items.intern("i" + std::to_string(i));
  LatentModel m(users, items, 1, 3.0);

  DatasetBuilder b;
  for (int i = 0; i < 4; ++i) b.add("exact", "i" + std::to_string(i), 3.0);
  b.add("noisy", "i0", 4.0);
  b.add("noisy", "i1", 2.0);
  b.add("sparse", "i0", 5.0);
  const RatingDataset train = std::move(b).build();

  const UserVariances v = estimate_user_variances(m, train, 1e-4, 2);
  CHECK(v.values[0] == doctest::Approx(1e-4));
  CHECK(v.values[1] == doctest::Approx(1.0));
  // Global mean squared residual: (0*4 + 1 + 1 + 4) / 7.
  CHECK(v.values[2] == doctest::Approx(6.0 / 7.0));
  for (double x : v.values) CHECK(x >= 1e-4);
}

TEST_CASE("user variances separate two noise groups on synthetic data") {
  SyntheticConfig c;
  c.n_users = 100;
  c.n_items = 400;
  c.k = 3;
  c.raters_per_item = 60;  // about 240 ratings per user
  c.seed = 5;
  const SyntheticData data = generate_synthetic(c);
  // Same rating pattern, noise sigma 0.2 for even users and 0.8 for odd ones.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> unit;
  DatasetBuilder b(data.dataset.scale());
  for (const Rating& r : data.dataset.ratings()) {
    const std::string& user = data.dataset.users().label(r.user);
    const std::string& item = data.dataset.items().label(r.item);
    const std::size_t u = data.truth.users().at(user);
    const double sigma = u % 2 == 0 ? 0.2 : 0.8;
    b.add(user, item, predict(data.truth, u, data.truth.items().at(item)) + sigma * unit(rng));
  }
  const UserVariances v = estimate_user_variances(data.truth, std::move(b).build(), 1e-4, 20);
  std::vector<double> low, high;
  for (std::size_t u = 0; u < c.n_users; ++u) {
    const double truth = u % 2 == 0 ? 0.04 : 0.64;
    (u % 2 == 0 ? low : high).push_back(std::abs(v.values[u] - truth) / truth);
  }
  for (auto* group : {&low, &high}) {
    std::nth_element(group->begin(), group->begin() + 25, group->end());
    CHECK((*group)[25] < 0.10);
  }
}

TEST_CASE("model and variance files round-trip losslessly") {
  SyntheticConfig c;
  c.n_users = 20;
  c.n_items = 10;
  c.raters_per_item = 5;
  c.k = 3;
  const SyntheticData data = generate_synthetic(c);
  std::stringstream buffer;
  save_model(buffer, data.truth);
  const LatentModel back = read_model(buffer);
  CHECK(back.mu == data.truth.mu);
  CHECK(back.user_factors == data.truth.user_factors);
  CHECK(back.item_factors == data.truth.item_factors);
  CHECK(back.user_bias == data.truth.user_bias);
  CHECK(back.item_bias == data.truth.item_bias);
  CHECK(back.users().labels() == data.truth.users().labels());

  UserVariances v = estimate_user_variances(data.truth, data.dataset);
  std::stringstream vb;
  save_variances(vb, data.truth, v);
  const UserVariances v2 = read_variances(vb, data.truth);
  CHECK(v2.values == v.values);
  CHECK(v2.floor == v.floor);

  std::istringstream bad("not-a-model 1\n");
  CHECK_THROWS_AS(read_model(bad), Error);
}
