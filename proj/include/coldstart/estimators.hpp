#pragma once

// Estimating a new item's (b_i, Q_i) from revealed ratings, and predicting
// the remaining users' ratings from the estimate.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "coldstart/data.hpp"
#include "coldstart/lfm.hpp"

namespace coldstart {

enum class EstimatorKind { ls, gls, similarity };

std::string_view to_string(EstimatorKind kind);
EstimatorKind parse_estimator(std::string_view text);

struct ItemEstimate {
  double bias = 0.0;
  Eigen::VectorXd factors;  ///< k
  EstimatorKind method = EstimatorKind::ls;

  /// (bias, factors) as one (k+1)-vector.
  Eigen::VectorXd stacked() const;
};

/// Revealed ratings of one item, reduced to regression form.
struct RevealedRatings {
  std::vector<std::size_t> users;  ///< model user indices
  Eigen::VectorXd targets;         ///< r_vi - b_v - mu
  Eigen::MatrixXd vectors;         ///< (k+1) x B augmented vectors
  std::vector<double> variances;   ///< empty, or per-user noise variances

  std::size_t size() const noexcept { return users.size(); }
};

/// Builds the regression view of `ratings` (user = model index). Variances,
/// when given, are indexed by model user.
RevealedRatings make_revealed(const LatentModel& model, std::span<const Rating> ratings,
                              std::span<const double> user_variances = {});

/// Default estimation ridge: 0.1 for B < 2(k+1), else 1e-6 (k+1).
double default_estimation_ridge(std::size_t budget, std::size_t k);

/// (ridge I + sum P'_v P'_v')^{-1} sum target_v P'_v.
/// Throws InsufficientDesign when the system is singular at zero ridge.
ItemEstimate least_squares_estimate(const RevealedRatings& revealed, double ridge);

/// (ridge I + P C^{-2} P')^{-1} P C^{-2} r. Requires variances.
ItemEstimate gls_estimate(const RevealedRatings& revealed, double ridge);

/// Bias from the mean residual of all raters; factors as the mean P_v over
/// raters with r_vi >= gamma, or zero when none qualifies.
/// `raw_ratings` are the r_vi aligned with `revealed.users`.
ItemEstimate similarity_estimate(const RevealedRatings& revealed,
                                 std::span<const double> raw_ratings, const LatentModel& model,
                                 double gamma = 4.0);

/// mu + b~_i + b_u + Q~_i'P_u.
double predict_new_item(const LatentModel& model, const ItemEstimate& estimate, std::size_t user);

}  // namespace coldstart
