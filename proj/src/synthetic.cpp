#include "coldstart/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "coldstart/numerics.hpp"

namespace coldstart {

namespace {

void validate(const SyntheticConfig& c) {
  if (c.n_users < 1 || c.n_items < 1 || c.k < 1 || c.raters_per_item < 1) {
    throw Error("synthetic counts must be at least 1");
  }
  if (c.raters_per_item > c.n_users) {
    throw Error("raters per item (" + std::to_string(c.raters_per_item) + ") exceed the " +
                std::to_string(c.n_users) + " users");
  }
  if (c.noise == NoiseKind::iid && !(c.sigma > 0.0)) throw Error("sigma must be positive");
  if (c.noise == NoiseKind::per_user && !(c.sigma_min > 0.0 && c.sigma_min <= c.sigma_max)) {
    throw Error("per-user sigma range must satisfy 0 < min <= max");
  }
  if (!(c.factor_scale > 0.0)) throw Error("factor scale must be positive");
  if (c.isotropic && c.n_users <= c.k) throw Error("isotropic users need more users than factors");
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticConfig& config) {
  validate(config);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> mu_dist(3.4, 3.8);
  std::uniform_real_distribution<double> bias_dist(-0.3, 0.3);
  std::normal_distribution<double> factor_dist(0.0, config.factor_scale);

  IdIndex users;
  IdIndex items;
  for (std::size_t u = 0; u < config.n_users; ++u) users.intern("u" + std::to_string(u));
  for (std::size_t i = 0; i < config.n_items; ++i) items.intern("i" + std::to_string(i));
  const auto n = static_cast<Eigen::Index>(config.n_users);
  const auto m = static_cast<Eigen::Index>(config.n_items);
  const auto k = static_cast<Eigen::Index>(config.k);

  LatentModel truth(users, items, config.k, mu_dist(rng));
  for (Eigen::Index u = 0; u < n; ++u) truth.user_bias(u) = bias_dist(rng);
  for (Eigen::Index i = 0; i < m; ++i) truth.item_bias(i) = bias_dist(rng);
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index f = 0; f < k; ++f) truth.user_factors(f, u) = factor_dist(rng);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index f = 0; f < k; ++f) truth.item_factors(f, i) = factor_dist(rng);
  }
  if (config.isotropic) {
    const Eigen::VectorXd mean = truth.user_factors.rowwise().mean();
    truth.user_factors.colwise() -= mean;
    truth.user_factors = numerics::whiten(truth.user_factors).whitened;
  }

  SyntheticData out;
  out.true_variances.floor = 0.0;
  std::vector<double> sigma(config.n_users, config.sigma);
  if (config.noise == NoiseKind::per_user) {
    std::uniform_real_distribution<double> sigma_dist(config.sigma_min, config.sigma_max);
    for (double& s : sigma) s = sigma_dist(rng);
  }
  for (double s : sigma) out.true_variances.values.push_back(s * s);

  const RatingScale scale = config.quantize
                                ? RatingScale{1.0, 5.0}
                                : RatingScale{-std::numeric_limits<double>::infinity(),
                                              std::numeric_limits<double>::infinity()};
  DatasetBuilder builder(scale);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> stamp(0, 1'000'000'000);
  std::vector<std::size_t> order(config.n_users);
  for (std::size_t i = 0; i < config.n_items; ++i) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t r = 0; r < config.raters_per_item; ++r) {
      std::uniform_int_distribution<std::size_t> pick(r, order.size() - 1);
      std::swap(order[r], order[pick(rng)]);
    }
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.raters_per_item));
    for (std::size_t r = 0; r < config.raters_per_item; ++r) {
      const std::size_t u = order[r];
      double value = predict(truth, u, i) + sigma[u] * unit(rng);
      if (config.quantize) value = std::clamp(std::round(value), 1.0, 5.0);
      builder.add(users.label(u), items.label(i), value, stamp(rng));
    }
  }
  out.dataset = std::move(builder).build();
  out.truth = std::move(truth);
  return out;
}

double monte_carlo_expected_mse(const LatentModel& truth, const RaterPool& pool,
                                std::span<const std::size_t> subset,
                                std::span<const std::size_t> eval_users,
                                std::span<const double> noise_variances,
                                const MonteCarloOptions& options) {
  if (options.trials < 1) throw Error("Monte Carlo needs at least one trial");
  if (subset.empty() || eval_users.empty()) throw Error("Monte Carlo needs raters and evaluation users");
  if (noise_variances.size() != truth.user_count()) {
    throw Error("noise variances must cover every truth user");
  }
  const auto item = truth.items().find(pool.item);
  if (!item) throw Error("item " + pool.item + " is not in the truth model");
  (void)pool.positions(subset);

  std::vector<double> clean_subset, clean_eval, sd_subset, sd_eval;
  for (std::size_t u : subset) {
    clean_subset.push_back(predict(truth, u, *item));
    sd_subset.push_back(std::sqrt(noise_variances[u]));
  }
  for (std::size_t u : eval_users) {
    clean_eval.push_back(predict(truth, u, *item));
    sd_eval.push_back(std::sqrt(noise_variances[u]));
  }
  const bool weighted = options.estimator == EstimatorKind::gls;

  std::vector<Rating> ratings(subset.size());
  for (std::size_t v = 0; v < subset.size(); ++v) ratings[v] = Rating{subset[v], *item, 0.0, 0};
  RevealedRatings revealed = make_revealed(truth, ratings, weighted ? noise_variances : std::span<const double>{});
  // Targets are refreshed per trial; the design part never changes.
  const Eigen::VectorXd offsets = [&] {
    Eigen::VectorXd o(static_cast<Eigen::Index>(subset.size()));
    for (std::size_t v = 0; v < subset.size(); ++v) {
      o(static_cast<Eigen::Index>(v)) = truth.mu + truth.user_bias(static_cast<Eigen::Index>(subset[v]));
    }
    return o;
  }();

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<double> raw(subset.size());
  double total = 0.0;
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    for (std::size_t v = 0; v < subset.size(); ++v) {
      raw[v] = clean_subset[v] + sd_subset[v] * unit(rng);
      revealed.targets(static_cast<Eigen::Index>(v)) = raw[v] - offsets(static_cast<Eigen::Index>(v));
    }
    ItemEstimate estimate;
    switch (options.estimator) {
      case EstimatorKind::ls: estimate = least_squares_estimate(revealed, options.ridge); break;
      case EstimatorKind::gls: estimate = gls_estimate(revealed, options.ridge); break;
      case EstimatorKind::similarity:
        estimate = similarity_estimate(revealed, raw, truth, options.similarity_gamma);
        break;
    }
    double sse = 0.0;
    for (std::size_t e = 0; e < eval_users.size(); ++e) {
      const double actual = clean_eval[e] + sd_eval[e] * unit(rng);
      const double err = predict_new_item(truth, estimate, eval_users[e]) - actual;
      sse += err * err;
    }
    total += sse / static_cast<double>(eval_users.size());
  }
  return total / static_cast<double>(options.trials);
}

}  // namespace coldstart
