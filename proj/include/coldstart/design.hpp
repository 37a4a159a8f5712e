#pragma once

// A-optimal design objectives over rater subsets, the expected-MSE formulas
// they stand for, and empirical diagnostics of the set function Phi
// (monotonicity, supermodularity, steepness).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "coldstart/data.hpp"

namespace coldstart::design {

enum class ObjectiveKind { a_opt, weighted_a_opt, transductive };

std::string_view to_string(ObjectiveKind kind);

struct DesignObjective {
  ObjectiveKind kind = ObjectiveKind::a_opt;
  double ridge = 0.0;
  std::optional<double> sigma2;                  ///< iid noise variance
  std::optional<Eigen::MatrixXd> second_moment;  ///< P P' / |U| of the target population
};

/// 1e-6 (k + 1), the ridge used for selection and all diagnostics.
double default_design_ridge(std::size_t dimension);

/// P P' / n over the columns of `vectors`.
Eigen::MatrixXd second_moment(const Eigen::MatrixXd& vectors);

/// Copy of `pool` with every vector v replaced by transform' v, e.g. the
/// transform of numerics::whiten over the whole user population.
RaterPool transform_pool(const RaterPool& pool, const Eigen::MatrixXd& transform);

/// a_opt: Trace((ridge I + P_B P_B')^{-1}); weighted_a_opt: the same with the
/// rank-one terms weighted by 1/sigma_v^2; transductive: Trace(Sigma M^{-1}).
double objective_value(const DesignObjective& objective, const RaterPool& pool,
                       std::span<const std::size_t> subset);

/// objective_value with the subset given as pool column positions.
double objective_at(const DesignObjective& objective, const RaterPool& pool,
                    std::span<const std::size_t> positions);

/// Expected MSE over an isotropic evaluation population: sigma^2 (objective + 1)
/// for the a_opt and transductive kinds, objective + mean(eval_variances) for
/// the weighted kind.
double expected_mse(const DesignObjective& objective, const RaterPool& pool,
                    std::span<const std::size_t> subset, std::span<const double> eval_variances);

/// Largest pool handled by exact subset enumeration.
inline constexpr std::size_t kExhaustiveLimit = 12;

/// Phi(S) = objective(S) - objective(pool) for every subset of a small pool,
/// with Phi(empty) replaced by max over disjoint nonempty A, B of
/// Phi(A) + Phi(B) - Phi(A u B).
class PhiTable {
 public:
  /// Throws Error when the pool exceeds kExhaustiveLimit.
  PhiTable(const RaterPool& pool, const DesignObjective& objective);

  std::size_t ground_size() const noexcept { return n_; }
  double operator()(std::uint32_t mask) const { return values_.at(mask); }
  double full_objective() const noexcept { return full_objective_; }
  /// Objective value before subtracting the full-pool value, without the extension at empty.
  double raw(std::uint32_t mask) const { return values_.at(mask) + full_objective_; }

 private:
  std::size_t n_ = 0;
  double full_objective_ = 0.0;
  std::vector<double> values_;
};

/// Phi of `subset` (user indices). The empty set uses the extension: exact
/// for pools up to kExhaustiveLimit, otherwise restricted to the pairs
/// ({x}, pool minus x), which bounds it from below.
double phi(const RaterPool& pool, std::span<const std::size_t> subset, double ridge);
double phi(const RaterPool& pool, std::span<const std::size_t> subset,
           const DesignObjective& objective);

struct SteepnessReport {
  double s = 0.0;
  double t = 0.0;  ///< s / (1 - s)
  double phi_empty = 0.0;
  std::size_t argmax_user = 0;
  bool exact = true;  ///< false when phi_empty came from the restricted extension

  /// (e^t - 1) / t, the greedy approximation factor.
  double approximation_factor() const;
};

/// Throws Error for pools smaller than 2 or when Phi(empty) - Phi({x}) <= 1e-12.
SteepnessReport steepness(const RaterPool& pool, double ridge);
SteepnessReport steepness(const RaterPool& pool, const DesignObjective& objective);

struct SetFunctionReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_excess = 0.0;  ///< largest violation beyond the slack
};

/// f(A u {x}) - f(A) <= f(B u {x}) - f(B) for A subset of B, x outside B.
/// Exhaustive over all triples of a ground set of `n` elements; `f` takes a
/// bitmask. The slack is 1e-9 (1 + largest |f| involved).
SetFunctionReport check_supermodular(const std::function<double(std::uint32_t)>& f, std::size_t n);

/// f(S) >= f(T) for every S subset of T, same slack.
SetFunctionReport check_monotone_decreasing(const std::function<double(std::uint32_t)>& f,
                                            std::size_t n);

/// Supermodularity of Phi over the pool: exhaustive up to kExhaustiveLimit
/// users, otherwise `samples` random (A, B, x) triples drawn from `seed`.
SetFunctionReport check_supermodular(const RaterPool& pool, double ridge,
                                     std::uint64_t seed = 1, std::size_t samples = 10000);
SetFunctionReport check_supermodular(const RaterPool& pool, const DesignObjective& objective,
                                     std::uint64_t seed = 1, std::size_t samples = 10000);

}  // namespace coldstart::design
