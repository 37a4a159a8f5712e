#pragma once

// Choosing B raters for a new item: backward greedy A-optimal elimination
// (plain and variance-weighted), forward greedy, and the baseline heuristics,
// plus an exhaustive optimum for small pools.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "coldstart/data.hpp"
#include "coldstart/design.hpp"

namespace coldstart {

enum class SelectionMethod {
  bgs1,
  bgs2,
  forward_greedy,
  cluster,
  random,
  frequent,
  edgy,
  early_birds,
  brute_force,
};

std::string_view to_string(SelectionMethod method);
SelectionMethod parse_method(std::string_view text);
/// True for methods whose result depends on the seed.
bool is_stochastic(SelectionMethod method);

struct SelectionResult {
  SelectionMethod method = SelectionMethod::bgs1;
  std::vector<std::size_t> selected;  ///< model user indices, in selection order
  std::optional<double> objective;    ///< final design objective, where defined
  std::chrono::nanoseconds elapsed{0};
  /// Objective after each greedy step (incremental value), empty for other methods.
  std::vector<double> trajectory;
  /// Eliminated users in elimination order (backward greedy only).
  std::vector<std::size_t> eliminated;
};

struct GreedyOptions {
  double ridge = 0.0;
  /// Pools above this size are thinned to the users of largest augmented norm.
  std::size_t thinning_cap = 20000;
  /// The maintained inverse is recomputed from scratch every this many updates.
  std::size_t refresh_interval = 128;
};

/// Backward greedy on Trace((ridge I + P_B P_B')^{-1}).
SelectionResult bgs1(const RaterPool& pool, std::size_t budget, const GreedyOptions& options);
SelectionResult bgs1(const RaterPool& pool, std::size_t budget, double ridge);

/// Backward greedy on the 1/sigma^2-weighted objective. Requires pool variances.
SelectionResult bgs2(const RaterPool& pool, std::size_t budget, const GreedyOptions& options);
SelectionResult bgs2(const RaterPool& pool, std::size_t budget, double ridge);

/// Forward greedy from the ridge-only design. Requires ridge > 0 when budget < d.
SelectionResult forward_greedy(const RaterPool& pool, std::size_t budget,
                               const GreedyOptions& options);
SelectionResult forward_greedy(const RaterPool& pool, std::size_t budget, double ridge);

enum class ClusterMode { one_per_cluster, proportional };

struct ClusterOptions {
  ClusterMode mode = ClusterMode::proportional;
  /// Cluster count for proportional mode; 0 means max(2, B/5) capped at B - 1.
  std::size_t clusters = 0;
  std::uint64_t seed = 1;
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;
};

/// k-means on unit-normalized user factors (the augmented constant dropped).
/// Users with zero factors are never selected.
SelectionResult cluster_select(const RaterPool& pool, std::size_t budget,
                               const ClusterOptions& options);

SelectionResult random_select(const RaterPool& pool, std::size_t budget, std::uint64_t seed);

/// Top-B by number of ratings in `train`. Users are matched by label.
SelectionResult frequent_raters(const RaterPool& pool, std::size_t budget,
                                const RatingDataset& train);

/// Top-B by population variance of the user's ratings in `train`.
SelectionResult edgy_raters(const RaterPool& pool, std::size_t budget, const RatingDataset& train);

/// The B pool users who rated the item first in `heldout`.
SelectionResult early_birds(const RaterPool& pool, std::size_t budget,
                            const RatingDataset& heldout);

/// Combinations enumerated by brute_force_optimal at most.
inline constexpr std::uint64_t kBruteForceLimit = 1000000;

/// Exhaustive minimum of objective_value over all size-B subsets.
SelectionResult brute_force_optimal(const RaterPool& pool, std::size_t budget,
                                    const design::DesignObjective& objective);

/// Everything a dispatch over SelectionMethod may need.
struct SelectionRequest {
  SelectionMethod method = SelectionMethod::bgs1;
  std::size_t budget = 1;
  double ridge = 0.0;
  std::uint64_t seed = 1;
  GreedyOptions greedy;   ///< ridge is overwritten by `ridge`
  ClusterOptions cluster; ///< seed is overwritten by `seed`
  const RatingDataset* train = nullptr;    ///< frequent, edgy
  const RatingDataset* heldout = nullptr;  ///< early_birds
};

SelectionResult select(const RaterPool& pool, const SelectionRequest& request);

}  // namespace coldstart
