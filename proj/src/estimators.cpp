#include "coldstart/estimators.hpp"

#include <cmath>
#include <string>

#include "coldstart/numerics.hpp"

namespace coldstart {

namespace {

// Pivots this small relative to the Gram diagonal mean the design is singular.
constexpr double kSingularPivot = 1e-12;

ItemEstimate unstack(const Eigen::VectorXd& theta, EstimatorKind method) {
  ItemEstimate out;
  out.bias = theta(0);
  out.factors = theta.tail(theta.size() - 1);
  out.method = method;
  if (!theta.allFinite()) throw InsufficientDesign("estimate is not finite");
  return out;
}

Eigen::VectorXd weighted_solve(const RevealedRatings& revealed, std::span<const double> weights,
                               double ridge) {
  if (!(ridge >= 0.0)) throw Error("ridge must be nonnegative");
  const Eigen::Index d = revealed.vectors.rows();
  if (revealed.size() == 0 && ridge == 0.0) {
    throw InsufficientDesign("no revealed ratings and zero ridge");
  }
  if (ridge == 0.0 && static_cast<Eigen::Index>(revealed.size()) < d) {
    throw InsufficientDesign("fewer revealed ratings than parameters at zero ridge");
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (std::size_t v = 0; v < revealed.size(); ++v) {
    const double w = weights.empty() ? 1.0 : weights[v];
    rhs += (w * revealed.targets(static_cast<Eigen::Index>(v))) *
           revealed.vectors.col(static_cast<Eigen::Index>(v));
  }
  const numerics::SpdMatrix m = numerics::gram(revealed.vectors, weights, ridge);
  try {
    return numerics::solve(m, rhs, ridge == 0.0 ? kSingularPivot : 0.0);
  } catch (const NotPositiveDefinite& e) {
    throw InsufficientDesign(std::string("singular design: ") + e.what());
  }
}

}  // namespace

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::ls: return "ls";
    case EstimatorKind::gls: return "gls";
    case EstimatorKind::similarity: return "similarity";
  }
  return "?";
}

EstimatorKind parse_estimator(std::string_view text) {
  if (text == "ls") return EstimatorKind::ls;
  if (text == "gls") return EstimatorKind::gls;
  if (text == "similarity") return EstimatorKind::similarity;
  throw Error("unknown estimator '" + std::string(text) + "'");
}

Eigen::VectorXd ItemEstimate::stacked() const {
  Eigen::VectorXd out(factors.size() + 1);
  out(0) = bias;
  out.tail(factors.size()) = factors;
  return out;
}

RevealedRatings make_revealed(const LatentModel& model, std::span<const Rating> ratings,
                              std::span<const double> user_variances) {
  RevealedRatings out;
  const auto b = static_cast<Eigen::Index>(ratings.size());
  out.targets.resize(b);
  out.vectors.resize(static_cast<Eigen::Index>(model.k() + 1), b);
  for (Eigen::Index v = 0; v < b; ++v) {
    const Rating& r = ratings[static_cast<std::size_t>(v)];
    out.users.push_back(r.user);
    out.vectors.col(v) = augment(model, r.user);
    out.targets(v) = r.value - model.user_bias(static_cast<Eigen::Index>(r.user)) - model.mu;
    if (!user_variances.empty()) {
      if (r.user >= user_variances.size()) throw Error("no variance for user " + std::to_string(r.user));
      out.variances.push_back(user_variances[r.user]);
    }
  }
  return out;
}

double default_estimation_ridge(std::size_t budget, std::size_t k) {
  const double d = static_cast<double>(k + 1);
  return budget < 2 * (k + 1) ? 0.1 : 1e-6 * d;
}

ItemEstimate least_squares_estimate(const RevealedRatings& revealed, double ridge) {
  return unstack(weighted_solve(revealed, {}, ridge), EstimatorKind::ls);
}

ItemEstimate gls_estimate(const RevealedRatings& revealed, double ridge) {
  if (revealed.variances.size() != revealed.size()) {
    throw Error("GLS estimation needs per-user variances");
  }
  std::vector<double> weights;
  weights.reserve(revealed.size());
  for (double s2 : revealed.variances) {
    if (!(s2 > 0.0)) throw Error("GLS variances must be positive");
    weights.push_back(1.0 / s2);
  }
  return unstack(weighted_solve(revealed, weights, ridge), EstimatorKind::gls);
}

ItemEstimate similarity_estimate(const RevealedRatings& revealed,
                                 std::span<const double> raw_ratings, const LatentModel& model,
                                 double gamma) {
  if (revealed.size() == 0) throw Error("similarity estimate needs at least one rating");
  if (raw_ratings.size() != revealed.size()) throw Error("raw ratings must align with the revealed users");
  const auto k = static_cast<Eigen::Index>(model.k());
  ItemEstimate out;
  out.method = EstimatorKind::similarity;
  out.factors = Eigen::VectorXd::Zero(k);
  double residual = 0.0;
  std::size_t liked = 0;
  for (std::size_t v = 0; v < revealed.size(); ++v) {
    const auto u = static_cast<Eigen::Index>(revealed.users[v]);
    residual += raw_ratings[v] - model.user_bias(u);
    if (raw_ratings[v] >= gamma) {
      out.factors += model.user_factors.col(u);
      ++liked;
    }
  }
  out.bias = residual / static_cast<double>(revealed.size()) - model.mu;
  if (liked > 0) out.factors /= static_cast<double>(liked);
  return out;
}

double predict_new_item(const LatentModel& model, const ItemEstimate& estimate, std::size_t user) {
  if (user >= model.user_count()) throw Error("unknown user index " + std::to_string(user));
  if (static_cast<std::size_t>(estimate.factors.size()) != model.k()) {
    throw Error("estimate dimension does not match the model");
  }
  const auto u = static_cast<Eigen::Index>(user);
  return model.mu + estimate.bias + model.user_bias(u) + estimate.factors.dot(model.user_factors.col(u));
}

}  // namespace coldstart
