#include "coldstart/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "coldstart/numerics.hpp"

namespace coldstart::design {

namespace {

constexpr double kSlack = 1e-9;
constexpr double kSteepnessGuard = 1e-12;
// Largest ground set the bitmask checkers accept; 3^16 triples per element is already slow.
constexpr std::size_t kMaskLimit = 16;

void validate(const DesignObjective& objective, const RaterPool& pool) {
  if (!(objective.ridge >= 0.0)) throw Error("design ridge must be nonnegative");
  if (objective.sigma2 && !(*objective.sigma2 > 0.0)) throw Error("sigma^2 must be positive");
  if (objective.kind == ObjectiveKind::weighted_a_opt && !pool.has_variances()) {
    throw Error("weighted objective needs pool variances");
  }
  if (objective.kind == ObjectiveKind::transductive) {
    if (!objective.second_moment) throw Error("transductive objective needs a second-moment matrix");
    const auto d = static_cast<Eigen::Index>(pool.dimension());
    if (objective.second_moment->rows() != d || objective.second_moment->cols() != d) {
      throw Error("second-moment matrix has the wrong order");
    }
  }
}

double weight_of(const DesignObjective& objective, const RaterPool& pool, std::size_t position) {
  return objective.kind == ObjectiveKind::weighted_a_opt ? 1.0 / pool.variances[position] : 1.0;
}

numerics::InverseState inverse_for(const DesignObjective& objective, const RaterPool& pool,
                                   std::span<const std::size_t> positions) {
  const auto d = static_cast<Eigen::Index>(pool.dimension());
  Eigen::MatrixXd cols(d, static_cast<Eigen::Index>(positions.size()));
  std::vector<double> weights;
  weights.reserve(positions.size());
  for (std::size_t c = 0; c < positions.size(); ++c) {
    if (positions[c] >= pool.size()) throw Error("pool position out of range");
    cols.col(static_cast<Eigen::Index>(c)) = pool.vectors.col(static_cast<Eigen::Index>(positions[c]));
    weights.push_back(weight_of(objective, pool, positions[c]));
  }
  const numerics::SpdMatrix m = numerics::gram(cols, weights, objective.ridge);
  if (objective.ridge == 0.0) {
    // Reject numerically singular designs before inverting.
    try {
      numerics::cholesky_lower(m.entries(), 1e-12);
    } catch (const NotPositiveDefinite& e) {
      throw InsufficientDesign(std::string("singular design: ") + e.what());
    }
  }
  try {
    return numerics::invert(m);
  } catch (const NotPositiveDefinite& e) {
    throw InsufficientDesign(std::string("singular design: ") + e.what());
  }
}

double value_of(const DesignObjective& objective, const numerics::InverseState& state) {
  if (objective.kind == ObjectiveKind::transductive) {
    return (*objective.second_moment * state.inverse()).trace();
  }
  return state.trace_inv();
}

std::vector<std::size_t> mask_positions(std::uint32_t mask, std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < n; ++p) {
    if (mask & (1u << p)) out.push_back(p);
  }
  return out;
}

std::vector<std::size_t> all_positions(const RaterPool& pool) {
  std::vector<std::size_t> out(pool.size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = p;
  return out;
}

// Objective of the pool minus each single user, from the full-pool inverse.
std::vector<double> leave_one_out(const DesignObjective& objective, const RaterPool& pool,
                                  const numerics::InverseState& full) {
  const double base = value_of(objective, full);
  std::vector<double> out(pool.size());
  std::vector<std::size_t> rest;
  for (std::size_t x = 0; x < pool.size(); ++x) {
    const Eigen::VectorXd v = pool.vectors.col(static_cast<Eigen::Index>(x));
    const double w = weight_of(objective, pool, x);
    const Eigen::VectorXd u = full.inverse() * v;
    const double denom = 1.0 - w * v.dot(u);
    if (denom >= numerics::kRemovalTolerance) {
      const double gain = objective.kind == ObjectiveKind::transductive
                              ? u.dot(*objective.second_moment * u)
                              : u.squaredNorm();
      out[x] = base + w * gain / denom;
      continue;
    }
    rest.clear();
    for (std::size_t p = 0; p < pool.size(); ++p) {
      if (p != x) rest.push_back(p);
    }
    try {
      out[x] = value_of(objective, inverse_for(objective, pool, rest));
    } catch (const InsufficientDesign&) {
      out[x] = std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

struct PhiPieces {
  double full = 0.0;
  double empty = 0.0;
  bool exact = true;
  std::vector<double> singles;  ///< Phi({x})
  std::vector<double> drops;    ///< Phi(E \ {x})
};

PhiPieces phi_pieces(const RaterPool& pool, const DesignObjective& objective) {
  validate(objective, pool);
  PhiPieces out;
  const std::size_t n = pool.size();
  if (n <= kExhaustiveLimit) {
    const PhiTable table(pool, objective);
    out.full = table.full_objective();
    out.empty = table(0);
    for (std::size_t x = 0; x < n; ++x) {
      out.singles.push_back(table(1u << x));
      out.drops.push_back(table(((1u << n) - 1) & ~(1u << x)));
    }
    return out;
  }
  const auto positions = all_positions(pool);
  const numerics::InverseState full = inverse_for(objective, pool, positions);
  out.full = value_of(objective, full);
  out.exact = false;
  out.drops = leave_one_out(objective, pool, full);
  for (double& v : out.drops) v -= out.full;
  out.empty = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t one[] = {x};
    out.singles.push_back(value_of(objective, inverse_for(objective, pool, one)) - out.full);
    out.empty = std::max(out.empty, out.singles[x] + out.drops[x]);
  }
  return out;
}

}  // namespace

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::a_opt: return "a_opt";
    case ObjectiveKind::weighted_a_opt: return "weighted_a_opt";
    case ObjectiveKind::transductive: return "transductive";
  }
  return "?";
}

double default_design_ridge(std::size_t dimension) { return 1e-6 * static_cast<double>(dimension); }

Eigen::MatrixXd second_moment(const Eigen::MatrixXd& vectors) {
  if (vectors.cols() == 0) throw Error("second moment of an empty population");
  Eigen::MatrixXd m = vectors * vectors.transpose() / static_cast<double>(vectors.cols());
  return 0.5 * (m + m.transpose());
}

RaterPool transform_pool(const RaterPool& pool, const Eigen::MatrixXd& transform) {
  if (transform.rows() != pool.vectors.rows()) throw Error("transform does not match the pool dimension");
  RaterPool out = pool;
  out.vectors = transform.transpose() * pool.vectors;
  return out;
}

double objective_at(const DesignObjective& objective, const RaterPool& pool,
                    std::span<const std::size_t> positions) {
  validate(objective, pool);
  return value_of(objective, inverse_for(objective, pool, positions));
}

double objective_value(const DesignObjective& objective, const RaterPool& pool,
                       std::span<const std::size_t> subset) {
  const auto positions = pool.positions(subset);
  return objective_at(objective, pool, positions);
}

double expected_mse(const DesignObjective& objective, const RaterPool& pool,
                    std::span<const std::size_t> subset, std::span<const double> eval_variances) {
  const double value = objective_value(objective, pool, subset);
  if (objective.kind == ObjectiveKind::weighted_a_opt) {
    if (eval_variances.empty()) throw Error("weighted expected MSE needs evaluation variances");
    double mean = 0.0;
    for (double s2 : eval_variances) mean += s2;
    return value + mean / static_cast<double>(eval_variances.size());
  }
  if (!objective.sigma2) throw Error("expected MSE needs sigma^2");
  return *objective.sigma2 * (value + 1.0);
}

PhiTable::PhiTable(const RaterPool& pool, const DesignObjective& objective) : n_(pool.size()) {
  if (n_ > kExhaustiveLimit) {
    throw Error("pool of " + std::to_string(n_) + " users is too large for exhaustive Phi");
  }
  validate(objective, pool);
  const std::uint32_t count = 1u << n_;
  const std::uint32_t everyone = count - 1;
  values_.assign(count, 0.0);
  for (std::uint32_t mask = 1; mask < count; ++mask) {
    const auto positions = mask_positions(mask, n_);
    try {
      values_[mask] = value_of(objective, inverse_for(objective, pool, positions));
    } catch (const InsufficientDesign&) {
      values_[mask] = std::numeric_limits<double>::infinity();
    }
  }
  full_objective_ = values_[everyone];
  for (std::uint32_t mask = 1; mask < count; ++mask) values_[mask] -= full_objective_;
  values_[everyone] = 0.0;

  double best = -std::numeric_limits<double>::infinity();
  for (std::uint32_t c = 1; c < count; ++c) {
    // Each unordered pair {A, c \ A} is visited twice; harmless.
    for (std::uint32_t a = (c - 1) & c; a > 0; a = (a - 1) & c) {
      const std::uint32_t b = c & ~a;
      best = std::max(best, values_[a] + values_[b] - values_[c]);
    }
  }
  // A single-user pool has no disjoint nonempty pair; fall back to its raw value.
  values_[0] = n_ >= 2 ? best
                       : value_of(objective, inverse_for(objective, pool, {})) - full_objective_;
}

double phi(const RaterPool& pool, std::span<const std::size_t> subset,
           const DesignObjective& objective) {
  validate(objective, pool);
  if (subset.empty()) return phi_pieces(pool, objective).empty;
  const auto positions = pool.positions(subset);
  const auto everyone = all_positions(pool);
  return objective_at(objective, pool, positions) - objective_at(objective, pool, everyone);
}

double phi(const RaterPool& pool, std::span<const std::size_t> subset, double ridge) {
  DesignObjective objective;
  objective.ridge = ridge;
  return phi(pool, subset, objective);
}

double SteepnessReport::approximation_factor() const {
  if (t == 0.0) return 1.0;
  if (std::isinf(t)) return std::numeric_limits<double>::infinity();
  return std::expm1(t) / t;
}

SteepnessReport steepness(const RaterPool& pool, const DesignObjective& objective) {
  if (pool.size() < 2) throw Error("steepness needs at least two users");
  const PhiPieces pieces = phi_pieces(pool, objective);
  SteepnessReport report;
  report.phi_empty = pieces.empty;
  report.exact = pieces.exact;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < pool.size(); ++x) {
    const double head = pieces.empty - pieces.singles[x];
    if (!(head > kSteepnessGuard)) {
      throw Error("degenerate pool: Phi(empty) - Phi({" + pool.labels[x] + "}) is not positive");
    }
    const double s = (head - pieces.drops[x]) / head;
    if (s > best) {
      best = s;
      report.argmax_user = pool.users[x];
    }
  }
  report.s = std::max(0.0, best);
  report.t = report.s >= 1.0 ? std::numeric_limits<double>::infinity() : report.s / (1.0 - report.s);
  return report;
}

SteepnessReport steepness(const RaterPool& pool, double ridge) {
  DesignObjective objective;
  objective.ridge = ridge;
  return steepness(pool, objective);
}

namespace {

void record(SetFunctionReport& report, double excess, double scale) {
  ++report.checked;
  const double beyond = excess - kSlack * (1.0 + scale);
  if (beyond > 0.0 || std::isnan(excess)) {
    ++report.violations;
    report.worst_excess = std::max(report.worst_excess, beyond);
  }
}

double magnitude(std::initializer_list<double> values) {
  double out = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) out = std::max(out, std::abs(v));
  }
  return out;
}

// Differences of infinities count as satisfied: both sides sit in the singular region.
double excess_of(double fa_x, double fa, double fb_x, double fb) {
  const double lhs = fa_x - fa;
  const double rhs = fb_x - fb;
  if (std::isnan(lhs) || std::isnan(rhs)) return 0.0;
  return lhs - rhs;
}

}  // namespace

SetFunctionReport check_supermodular(const std::function<double(std::uint32_t)>& f, std::size_t n) {
  if (n > kMaskLimit) throw Error("ground set too large for exhaustive enumeration");
  SetFunctionReport report;
  const std::uint32_t everyone = (1u << n) - 1;
  std::vector<double> cache(everyone + 1u);
  for (std::uint32_t m = 0; m <= everyone; ++m) cache[m] = f(m);
  for (std::size_t x = 0; x < n; ++x) {
    const std::uint32_t bit = 1u << x;
    const std::uint32_t rest = everyone & ~bit;
    for (std::uint32_t b = rest;; b = (b - 1) & rest) {
      for (std::uint32_t a = b;; a = (a - 1) & b) {
        const double fa = cache[a], fax = cache[a | bit], fb = cache[b], fbx = cache[b | bit];
        record(report, excess_of(fax, fa, fbx, fb), magnitude({fa, fax, fb, fbx}));
        if (a == 0) break;
      }
      if (b == 0) break;
    }
  }
  return report;
}

SetFunctionReport check_monotone_decreasing(const std::function<double(std::uint32_t)>& f,
                                            std::size_t n) {
  if (n > kMaskLimit) throw Error("ground set too large for exhaustive enumeration");
  SetFunctionReport report;
  const std::uint32_t everyone = (1u << n) - 1;
  std::vector<double> cache(everyone + 1u);
  for (std::uint32_t m = 0; m <= everyone; ++m) cache[m] = f(m);
  for (std::uint32_t t = 0;; ++t) {
    for (std::uint32_t s = t;; s = (s - 1) & t) {
      const double excess = std::isinf(cache[s]) && std::isinf(cache[t]) ? 0.0 : cache[t] - cache[s];
      record(report, excess, magnitude({cache[s], cache[t]}));
      if (s == 0) break;
    }
    if (t == everyone) break;
  }
  return report;
}

SetFunctionReport check_supermodular(const RaterPool& pool, const DesignObjective& objective,
                                     std::uint64_t seed, std::size_t samples) {
  validate(objective, pool);
  const std::size_t n = pool.size();
  if (n <= kExhaustiveLimit) {
    const PhiTable table(pool, objective);
    return check_supermodular([&](std::uint32_t m) { return table(m); }, n);
  }
  const PhiPieces pieces = phi_pieces(pool, objective);
  auto value = [&](const std::vector<std::size_t>& positions) {
    if (positions.empty()) return pieces.empty;
    try {
      return objective_at(objective, pool, positions) - pieces.full;
    } catch (const InsufficientDesign&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::bernoulli_distribution coin(0.5);
  SetFunctionReport report;
  std::vector<std::size_t> a, b;
  for (std::size_t trial = 0; trial < samples; ++trial) {
    const std::size_t x = pick(rng);
    a.clear();
    b.clear();
    for (std::size_t p = 0; p < n; ++p) {
      if (p == x || !coin(rng)) continue;
      b.push_back(p);
      if (coin(rng)) a.push_back(p);
    }
    auto with_x = [x](std::vector<std::size_t> s) {
      s.insert(std::upper_bound(s.begin(), s.end(), x), x);
      return s;
    };
    const double fa = value(a), fax = value(with_x(a)), fb = value(b), fbx = value(with_x(b));
    record(report, excess_of(fax, fa, fbx, fb), magnitude({fa, fax, fb, fbx}));
  }
  return report;
}

SetFunctionReport check_supermodular(const RaterPool& pool, double ridge, std::uint64_t seed,
                                     std::size_t samples) {
  DesignObjective objective;
  objective.ridge = ridge;
  return check_supermodular(pool, objective, seed, samples);
}

}  // namespace coldstart::design
