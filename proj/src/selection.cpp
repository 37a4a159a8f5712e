#include "coldstart/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "coldstart/numerics.hpp"

namespace coldstart {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kTieTolerance = 1e-12;

void check_budget(const RaterPool& pool, std::size_t budget) {
  if (budget < 1) throw Error("budget must be at least 1");
  if (budget > pool.size()) {
    throw Error("budget " + std::to_string(budget) + " exceeds the pool of " +
                std::to_string(pool.size()) + " users for item " + pool.item);
  }
}

// Strictly better than the incumbent beyond the relative tie tolerance.
bool improves(double candidate, double incumbent) {
  if (!std::isfinite(incumbent)) return candidate < incumbent;
  const double scale = std::max(std::abs(candidate), std::abs(incumbent));
  return candidate < incumbent - kTieTolerance * scale;
}

std::vector<double> greedy_weights(const RaterPool& pool, bool weighted) {
  std::vector<double> w(pool.size(), 1.0);
  if (!weighted) return w;
  if (!pool.has_variances()) throw Error("weighted greedy selection needs pool variances");
  for (std::size_t p = 0; p < pool.size(); ++p) {
    if (!(pool.variances[p] > 0.0)) throw Error("pool variances must be positive");
    w[p] = 1.0 / pool.variances[p];
  }
  return w;
}

// Positions kept after thinning, ascending.
std::vector<std::size_t> thinned_positions(const RaterPool& pool, std::size_t budget,
                                           std::size_t cap) {
  std::vector<std::size_t> positions(pool.size());
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  const std::size_t keep = std::max(cap, budget);
  if (pool.size() <= keep) return positions;
  std::vector<double> norms(pool.size());
  for (std::size_t p = 0; p < pool.size(); ++p) {
    norms[p] = pool.vectors.col(static_cast<Eigen::Index>(p)).squaredNorm();
  }
  std::stable_sort(positions.begin(), positions.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });
  positions.resize(keep);
  std::sort(positions.begin(), positions.end());
  return positions;
}

numerics::InverseState fresh_state(const RaterPool& pool, std::span<const std::size_t> positions,
                                   const std::vector<double>& weights, double ridge) {
  const auto d = static_cast<Eigen::Index>(pool.dimension());
  Eigen::MatrixXd cols(d, static_cast<Eigen::Index>(positions.size()));
  std::vector<double> w;
  w.reserve(positions.size());
  for (std::size_t c = 0; c < positions.size(); ++c) {
    cols.col(static_cast<Eigen::Index>(c)) = pool.vectors.col(static_cast<Eigen::Index>(positions[c]));
    w.push_back(weights[positions[c]]);
  }
  try {
    return numerics::invert(numerics::gram(cols, w, ridge));
  } catch (const NotPositiveDefinite& e) {
    throw InsufficientDesign(std::string("singular design for greedy selection: ") + e.what());
  }
}

SelectionResult backward_greedy(const RaterPool& pool, std::size_t budget,
                                const GreedyOptions& options, bool weighted) {
  const auto start = Clock::now();
  check_budget(pool, budget);
  if (options.refresh_interval == 0) throw Error("refresh interval must be positive");
  const std::vector<double> weights = greedy_weights(pool, weighted);
  std::vector<std::size_t> alive = thinned_positions(pool, budget, options.thinning_cap);

  SelectionResult result;
  result.method = weighted ? SelectionMethod::bgs2 : SelectionMethod::bgs1;
  numerics::InverseState state = fresh_state(pool, alive, weights, options.ridge);
  std::size_t updates = 0;
  const auto d = static_cast<Eigen::Index>(pool.dimension());
  Eigen::MatrixXd cols(d, 0);
  std::vector<std::size_t> rest;

  while (alive.size() > budget) {
    const auto n = static_cast<Eigen::Index>(alive.size());
    cols.resize(d, n);
    for (Eigen::Index c = 0; c < n; ++c) {
      cols.col(c) = pool.vectors.col(static_cast<Eigen::Index>(alive[static_cast<std::size_t>(c)]));
    }
    const Eigen::MatrixXd u = state.inverse() * cols;
    std::size_t best = alive.size();
    double best_delta = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < n; ++c) {
      const double w = weights[alive[static_cast<std::size_t>(c)]];
      const auto delta = numerics::downdate_trace_delta_from(cols.col(c), u.col(c), w);
      if (!delta) continue;
      if (best == alive.size() || improves(*delta, best_delta)) {
        best = static_cast<std::size_t>(c);
        best_delta = *delta;
      }
    }
    if (best < alive.size()) {
      const std::size_t p = alive[best];
      state.downdate(pool.vectors.col(static_cast<Eigen::Index>(p)), weights[p]);
      alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best));
      result.eliminated.push_back(pool.users[p]);
      if (++updates % options.refresh_interval == 0) {
        state = fresh_state(pool, alive, weights, options.ridge);
      }
    } else {
      // Every rank-one removal is numerically forbidden: drop the first user
      // whose removal still leaves an invertible design.
      bool removed = false;
      for (std::size_t c = 0; c < alive.size() && !removed; ++c) {
        rest = alive;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(c));
        try {
          state = fresh_state(pool, rest, weights, options.ridge);
        } catch (const InsufficientDesign&) {
          continue;
        }
        result.eliminated.push_back(pool.users[alive[c]]);
        alive = rest;
        removed = true;
      }
      if (!removed) {
        throw Error("backward greedy: no user of item " + pool.item + " can be removed with " +
                    std::to_string(alive.size()) + " users left");
      }
    }
    result.trajectory.push_back(state.trace_inv());
  }

  for (std::size_t p : alive) result.selected.push_back(pool.users[p]);
  result.objective = fresh_state(pool, alive, weights, options.ridge).trace_inv();
  result.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  return result;
}

std::vector<std::size_t> order_by_score(const RaterPool& pool, std::size_t budget,
                                        const std::vector<double>& scores) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < budget; ++i) out.push_back(pool.users[order[i]]);
  return out;
}

SelectionResult finish(SelectionMethod method, std::vector<std::size_t> selected,
                       Clock::time_point start) {
  SelectionResult result;
  result.method = method;
  result.selected = std::move(selected);
  result.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  return result;
}

}  // namespace

std::string_view to_string(SelectionMethod method) {
  switch (method) {
    case SelectionMethod::bgs1: return "bgs1";
    case SelectionMethod::bgs2: return "bgs2";
    case SelectionMethod::forward_greedy: return "forward_greedy";
    case SelectionMethod::cluster: return "cluster";
    case SelectionMethod::random: return "random";
    case SelectionMethod::frequent: return "frequent";
    case SelectionMethod::edgy: return "edgy";
    case SelectionMethod::early_birds: return "early_birds";
    case SelectionMethod::brute_force: return "brute_force";
  }
  return "?";
}

SelectionMethod parse_method(std::string_view text) {
  for (auto m : {SelectionMethod::bgs1, SelectionMethod::bgs2, SelectionMethod::forward_greedy,
                 SelectionMethod::cluster, SelectionMethod::random, SelectionMethod::frequent,
                 SelectionMethod::edgy, SelectionMethod::early_birds,
                 SelectionMethod::brute_force}) {
    if (text == to_string(m)) return m;
  }
  throw Error("unknown selection method '" + std::string(text) + "'");
}

bool is_stochastic(SelectionMethod method) {
  return method == SelectionMethod::random || method == SelectionMethod::cluster;
}

SelectionResult bgs1(const RaterPool& pool, std::size_t budget, const GreedyOptions& options) {
  return backward_greedy(pool, budget, options, false);
}

SelectionResult bgs1(const RaterPool& pool, std::size_t budget, double ridge) {
  GreedyOptions options;
  options.ridge = ridge;
  return bgs1(pool, budget, options);
}

SelectionResult bgs2(const RaterPool& pool, std::size_t budget, const GreedyOptions& options) {
  return backward_greedy(pool, budget, options, true);
}

SelectionResult bgs2(const RaterPool& pool, std::size_t budget, double ridge) {
  GreedyOptions options;
  options.ridge = ridge;
  return bgs2(pool, budget, options);
}

SelectionResult forward_greedy(const RaterPool& pool, std::size_t budget,
                               const GreedyOptions& options) {
  const auto start = Clock::now();
  check_budget(pool, budget);
  if (!(options.ridge > 0.0)) throw Error("forward greedy needs a positive ridge");
  if (options.refresh_interval == 0) throw Error("refresh interval must be positive");
  const std::vector<double> weights(pool.size(), 1.0);
  const auto d = static_cast<Eigen::Index>(pool.dimension());
  numerics::InverseState state(numerics::SpdMatrix(options.ridge * Eigen::MatrixXd::Identity(d, d)));

  SelectionResult result;
  result.method = SelectionMethod::forward_greedy;
  std::vector<char> taken(pool.size(), 0);
  std::vector<std::size_t> chosen;
  for (std::size_t step = 0; step < budget; ++step) {
    const Eigen::MatrixXd u = state.inverse() * pool.vectors;
    std::size_t best = pool.size();
    double best_delta = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < pool.size(); ++p) {
      if (taken[p]) continue;
      const auto col = static_cast<Eigen::Index>(p);
      const auto delta = numerics::downdate_trace_delta_from(pool.vectors.col(col), u.col(col), -1.0);
      if (!delta) continue;
      if (best == pool.size() || improves(*delta, best_delta)) {
        best = p;
        best_delta = *delta;
      }
    }
    taken[best] = 1;
    chosen.push_back(best);
    state.downdate(pool.vectors.col(static_cast<Eigen::Index>(best)), -1.0);
    if ((step + 1) % options.refresh_interval == 0) {
      state = fresh_state(pool, chosen, weights, options.ridge);
    }
    result.trajectory.push_back(state.trace_inv());
    result.selected.push_back(pool.users[best]);
  }
  result.objective = fresh_state(pool, chosen, weights, options.ridge).trace_inv();
  result.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  return result;
}

SelectionResult forward_greedy(const RaterPool& pool, std::size_t budget, double ridge) {
  GreedyOptions options;
  options.ridge = ridge;
  return forward_greedy(pool, budget, options);
}

namespace {

struct KMeans {
  std::vector<std::size_t> assignment;  ///< cluster of each point
  Eigen::MatrixXd centers;              ///< dims x clusters
};

double squared_distance(const Eigen::MatrixXd& points, Eigen::Index p, const Eigen::MatrixXd& centers,
                        Eigen::Index c) {
  return (points.col(p) - centers.col(c)).squaredNorm();
}

KMeans kmeans(const Eigen::MatrixXd& points, std::size_t clusters, const ClusterOptions& options,
              std::mt19937_64& rng) {
  const Eigen::Index n = points.cols();
  const auto c_count = static_cast<Eigen::Index>(clusters);
  KMeans out;
  out.centers.resize(points.rows(), c_count);
  out.assignment.assign(static_cast<std::size_t>(n), 0);

  // Farthest-point seeding from a random first center.
  std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  Eigen::Index next = first(rng);
  for (Eigen::Index c = 0; c < c_count; ++c) {
    out.centers.col(c) = points.col(next);
    Eigen::Index far = 0;
    double far_distance = -1.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      auto& best = nearest[static_cast<std::size_t>(p)];
      best = std::min(best, squared_distance(points, p, out.centers, c));
      if (best > far_distance) {
        far_distance = best;
        far = p;
      }
    }
    next = far;
  }

  for (std::size_t iteration = 0; iteration < options.max_iterations; ++iteration) {
    std::vector<double> distance(static_cast<std::size_t>(n));
    for (Eigen::Index p = 0; p < n; ++p) {
      std::size_t best = 0;
      double best_distance = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < c_count; ++c) {
        const double dist = squared_distance(points, p, out.centers, c);
        if (dist < best_distance) {
          best_distance = dist;
          best = static_cast<std::size_t>(c);
        }
      }
      out.assignment[static_cast<std::size_t>(p)] = best;
      distance[static_cast<std::size_t>(p)] = best_distance;
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(points.rows(), c_count);
    std::vector<std::size_t> sizes(clusters, 0);
    for (Eigen::Index p = 0; p < n; ++p) {
      const std::size_t c = out.assignment[static_cast<std::size_t>(p)];
      sums.col(static_cast<Eigen::Index>(c)) += points.col(p);
      ++sizes[c];
    }
    double movement = 0.0;
    for (Eigen::Index c = 0; c < c_count; ++c) {
      Eigen::VectorXd center;
      if (sizes[static_cast<std::size_t>(c)] == 0) {
        // Re-seed an empty cluster at the point farthest from its center.
        const auto far = static_cast<Eigen::Index>(
            std::max_element(distance.begin(), distance.end()) - distance.begin());
        center = points.col(far);
        distance[static_cast<std::size_t>(far)] = -1.0;
        out.assignment[static_cast<std::size_t>(far)] = static_cast<std::size_t>(c);
      } else {
        center = sums.col(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      }
      movement = std::max(movement, (center - out.centers.col(c)).norm());
      out.centers.col(c) = center;
    }
    if (movement < options.tolerance) break;
  }
  return out;
}

}  // namespace

SelectionResult cluster_select(const RaterPool& pool, std::size_t budget,
                               const ClusterOptions& options) {
  const auto start = Clock::now();
  check_budget(pool, budget);
  const Eigen::Index k = static_cast<Eigen::Index>(pool.dimension()) - 1;
  std::vector<std::size_t> eligible;
  for (std::size_t p = 0; p < pool.size(); ++p) {
    if (pool.vectors.col(static_cast<Eigen::Index>(p)).tail(k).norm() > 0.0) eligible.push_back(p);
  }
  if (eligible.size() < budget) {
    throw Error("only " + std::to_string(eligible.size()) +
                " pool users have nonzero factors, fewer than the budget");
  }
  Eigen::MatrixXd points(k, static_cast<Eigen::Index>(eligible.size()));
  for (std::size_t e = 0; e < eligible.size(); ++e) {
    const Eigen::VectorXd f = pool.vectors.col(static_cast<Eigen::Index>(eligible[e])).tail(k);
    points.col(static_cast<Eigen::Index>(e)) = f / f.norm();
  }

  ClusterMode mode = options.mode;
  std::size_t clusters = budget;
  if (mode == ClusterMode::proportional) {
    if (budget == 1) {
      mode = ClusterMode::one_per_cluster;
    } else {
      clusters = options.clusters != 0 ? options.clusters
                                       : std::min(std::max<std::size_t>(2, budget / 5), budget - 1);
      if (clusters >= budget) throw Error("proportional clustering needs fewer clusters than the budget");
    }
  }
  clusters = std::min(clusters, eligible.size());

  std::mt19937_64 rng(options.seed);
  const KMeans km = kmeans(points, clusters, options, rng);
  std::vector<std::vector<std::size_t>> members(clusters);
  for (std::size_t e = 0; e < eligible.size(); ++e) members[km.assignment[e]].push_back(e);

  std::vector<std::size_t> chosen;  // indices into `eligible`
  std::vector<char> taken(eligible.size(), 0);
  if (mode == ClusterMode::one_per_cluster) {
    for (std::size_t c = 0; c < clusters; ++c) {
      std::size_t best = eligible.size();
      double best_distance = std::numeric_limits<double>::infinity();
      for (std::size_t e : members[c]) {
        const double dist = squared_distance(points, static_cast<Eigen::Index>(e), km.centers,
                                             static_cast<Eigen::Index>(c));
        if (dist < best_distance) {
          best_distance = dist;
          best = e;
        }
      }
      if (best < eligible.size()) {
        chosen.push_back(best);
        taken[best] = 1;
      }
    }
  } else {
    std::vector<std::size_t> quota(clusters);
    std::vector<double> remainder(clusters);
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < clusters; ++c) {
      const double exact = static_cast<double>(budget) * static_cast<double>(members[c].size()) /
                           static_cast<double>(eligible.size());
      quota[c] = static_cast<std::size_t>(std::floor(exact));
      remainder[c] = exact - static_cast<double>(quota[c]);
      assigned += quota[c];
    }
    std::vector<std::size_t> order(clusters);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < budget && i < clusters; ++i) {
      if (quota[order[i]] < members[order[i]].size()) {
        ++quota[order[i]];
        ++assigned;
      }
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      std::vector<std::size_t> shuffled = members[c];
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      for (std::size_t i = 0; i < quota[c] && i < shuffled.size(); ++i) {
        chosen.push_back(shuffled[i]);
        taken[shuffled[i]] = 1;
      }
    }
  }
  // Top up from the remaining eligible users should clustering leave a gap.
  for (std::size_t e = 0; chosen.size() < budget && e < eligible.size(); ++e) {
    if (!taken[e]) {
      chosen.push_back(e);
      taken[e] = 1;
    }
  }
  chosen.resize(budget);
  std::vector<std::size_t> selected;
  for (std::size_t e : chosen) selected.push_back(pool.users[eligible[e]]);
  return finish(SelectionMethod::cluster, std::move(selected), start);
}

SelectionResult random_select(const RaterPool& pool, std::size_t budget, std::uint64_t seed) {
  const auto start = Clock::now();
  check_budget(pool, budget);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < budget; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < budget; ++i) selected.push_back(pool.users[order[i]]);
  return finish(SelectionMethod::random, std::move(selected), start);
}

SelectionResult frequent_raters(const RaterPool& pool, std::size_t budget,
                                const RatingDataset& train) {
  const auto start = Clock::now();
  check_budget(pool, budget);
  std::vector<double> counts(pool.size(), 0.0);
  for (std::size_t p = 0; p < pool.size(); ++p) {
    if (auto u = train.users().find(pool.labels[p])) {
      counts[p] = static_cast<double>(train.user_ratings(*u).size());
    }
  }
  return finish(SelectionMethod::frequent, order_by_score(pool, budget, counts), start);
}

SelectionResult edgy_raters(const RaterPool& pool, std::size_t budget, const RatingDataset& train) {
  const auto start = Clock::now();
  check_budget(pool, budget);
  std::vector<double> variance(pool.size(), 0.0);
  for (std::size_t p = 0; p < pool.size(); ++p) {
    const auto u = train.users().find(pool.labels[p]);
    if (!u) continue;
    const auto rows = train.user_ratings(*u);
    if (rows.size() < 2) continue;
    double mean = 0.0;
    for (std::size_t r : rows) mean += train.ratings()[r].value;
    mean /= static_cast<double>(rows.size());
    double ss = 0.0;
    for (std::size_t r : rows) {
      const double e = train.ratings()[r].value - mean;
      ss += e * e;
    }
    variance[p] = ss / static_cast<double>(rows.size());
  }
  return finish(SelectionMethod::edgy, order_by_score(pool, budget, variance), start);
}

SelectionResult early_birds(const RaterPool& pool, std::size_t budget,
                            const RatingDataset& heldout) {
  const auto start = Clock::now();
  check_budget(pool, budget);
  // Users without a held-out rating of the item sort last.
  std::vector<double> negated(pool.size(), -std::numeric_limits<double>::infinity());
  if (auto item = heldout.items().find(pool.item)) {
    for (std::size_t p = 0; p < pool.size(); ++p) {
      if (auto u = heldout.users().find(pool.labels[p])) {
        for (std::size_t r : heldout.user_ratings(*u)) {
          if (heldout.ratings()[r].item == *item) {
            negated[p] = -static_cast<double>(heldout.ratings()[r].timestamp);
            break;
          }
        }
      }
    }
  }
  return finish(SelectionMethod::early_birds, order_by_score(pool, budget, negated), start);
}

namespace {

std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    out = out * (n - k + i) / i;
    if (out > cap) return cap + 1;
  }
  return out;
}

}  // namespace

SelectionResult brute_force_optimal(const RaterPool& pool, std::size_t budget,
                                    const design::DesignObjective& objective) {
  const auto start = Clock::now();
  check_budget(pool, budget);
  const std::uint64_t combos = binomial_capped(pool.size(), budget, kBruteForceLimit);
  if (combos > kBruteForceLimit) {
    throw Error("brute force would enumerate more than " + std::to_string(kBruteForceLimit) +
                " subsets");
  }
  std::vector<std::size_t> current(budget);
  std::iota(current.begin(), current.end(), std::size_t{0});
  std::vector<std::size_t> best;
  double best_value = std::numeric_limits<double>::infinity();
  const std::size_t n = pool.size();
  while (true) {
    double value = std::numeric_limits<double>::infinity();
    try {
      value = design::objective_at(objective, pool, current);
    } catch (const InsufficientDesign&) {
    }
    if (value < best_value) {
      best_value = value;
      best = current;
    }
    // Next combination in lexicographic order.
    std::size_t i = budget;
    while (i > 0 && current[i - 1] == n - budget + i - 1) --i;
    if (i == 0) break;
    ++current[i - 1];
    for (std::size_t j = i; j < budget; ++j) current[j] = current[j - 1] + 1;
  }
  if (best.empty()) throw InsufficientDesign("every subset of the budget size is singular");
  std::vector<std::size_t> selected;
  for (std::size_t p : best) selected.push_back(pool.users[p]);
  SelectionResult result = finish(SelectionMethod::brute_force, std::move(selected), start);
  result.objective = best_value;
  return result;
}

SelectionResult select(const RaterPool& pool, const SelectionRequest& request) {
  GreedyOptions greedy = request.greedy;
  greedy.ridge = request.ridge;
  ClusterOptions cluster = request.cluster;
  cluster.seed = request.seed;
  switch (request.method) {
    case SelectionMethod::bgs1: return bgs1(pool, request.budget, greedy);
    case SelectionMethod::bgs2: return bgs2(pool, request.budget, greedy);
    case SelectionMethod::forward_greedy: return forward_greedy(pool, request.budget, greedy);
    case SelectionMethod::cluster: return cluster_select(pool, request.budget, cluster);
    case SelectionMethod::random: return random_select(pool, request.budget, request.seed);
    case SelectionMethod::frequent:
      if (!request.train) throw Error("frequent raters need the training set");
      return frequent_raters(pool, request.budget, *request.train);
    case SelectionMethod::edgy:
      if (!request.train) throw Error("edgy raters need the training set");
      return edgy_raters(pool, request.budget, *request.train);
    case SelectionMethod::early_birds:
      if (!request.heldout) throw Error("early birds need the held-out ratings");
      return early_birds(pool, request.budget, *request.heldout);
    case SelectionMethod::brute_force: {
      design::DesignObjective objective;
      objective.ridge = request.ridge;
      return brute_force_optimal(pool, request.budget, objective);
    }
  }
  throw Error("unhandled selection method");
}

}  // namespace coldstart
