#pragma once

// Synthetic ratings drawn from a known biased factor model with Gaussian
// noise, and Monte Carlo estimates of a design's expected prediction error.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

#include "coldstart/data.hpp"
#include "coldstart/estimators.hpp"
#include "coldstart/lfm.hpp"

namespace coldstart {

enum class NoiseKind { iid, per_user };

struct SyntheticConfig {
  std::size_t n_users = 1000;
  std::size_t n_items = 300;
  std::size_t k = 10;
  std::size_t raters_per_item = 400;
  NoiseKind noise = NoiseKind::iid;
  double sigma = 0.5;      ///< noise standard deviation, iid case
  double sigma_min = 0.2;  ///< per-user standard deviations are uniform on [sigma_min, sigma_max]
  double sigma_max = 0.8;
  double factor_scale = 0.3;  ///< standard deviation of every factor coordinate
  /// Center and whiten the user factors so that sum_u (1, P_u)(1, P_u)' = n I.
  bool isotropic = false;
  /// Round ratings to integers on [1, 5]. Breaks the exact noise model.
  bool quantize = false;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  RatingDataset dataset;
  LatentModel truth;
  UserVariances true_variances;  ///< sigma_u^2, indexed by truth user
};

/// Users are labelled u0, u1, ..., items i0, i1, .... Unquantized ratings use
/// an unbounded scale. Throws Error on invalid configurations.
SyntheticData generate_synthetic(const SyntheticConfig& config);

struct MonteCarloOptions {
  EstimatorKind estimator = EstimatorKind::ls;
  double ridge = 0.0;
  std::size_t trials = 20000;
  std::uint64_t seed = 1;
  double similarity_gamma = 4.0;
};

/// Average over `trials` fresh noise draws of the MSE on `eval_users` of the
/// item estimate fitted to the ratings of `subset`. Ratings follow the
/// truth model for item pool.item plus N(0, noise_variances[u]) noise; the
/// evaluation ratings get independent noise. GLS weights use the same
/// variances. All users are truth model indices.
double monte_carlo_expected_mse(const LatentModel& truth, const RaterPool& pool,
                                std::span<const std::size_t> subset,
                                std::span<const std::size_t> eval_users,
                                std::span<const double> noise_variances,
                                const MonteCarloOptions& options);

}  // namespace coldstart
