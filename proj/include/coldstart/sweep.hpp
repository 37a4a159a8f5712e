#pragma once

// Budget sweeps: for every (method, budget) cell, select raters for each new
// item, reveal their ratings, estimate the item, predict the remaining
// raters, and pool the squared errors into one RMSE.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coldstart/data.hpp"
#include "coldstart/estimators.hpp"
#include "coldstart/lfm.hpp"
#include "coldstart/selection.hpp"
#include "coldstart/synthetic.hpp"

namespace coldstart {

struct SweepConfig {
  std::vector<std::size_t> budgets;      ///< ascending
  std::vector<SelectionMethod> methods;  ///< rows follow this order
  /// Estimator for every method; unset means GLS for bgs2 and LS otherwise.
  std::optional<EstimatorKind> estimator;
  std::map<SelectionMethod, EstimatorKind> estimator_by_method;  ///< wins over `estimator`
  std::size_t n_items_evaluated = 0;  ///< 0 means every new item
  std::size_t repeats = 1;            ///< runs averaged for seeded methods
  std::uint64_t seed = 1;
  std::optional<double> selection_ridge;   ///< default 1e-6 (k + 1)
  std::optional<double> estimation_ridge;  ///< default default_estimation_ridge(B, k)
  double similarity_gamma = 4.0;
  bool clamp_predictions = false;
  std::size_t thinning_cap = 20000;
  ClusterMode cluster_mode = ClusterMode::proportional;
  std::size_t clusters = 0;
  /// Select on user vectors whitened over the model's whole user population.
  /// Estimation and mean_objective stay in the raw coordinates.
  bool whiten = false;
};

/// Throws Error when budgets are empty, zero or not ascending, methods are
/// empty, or repeats is zero.
void validate(const SweepConfig& config);

EstimatorKind estimator_for(const SweepConfig& config, SelectionMethod method);

struct SweepRow {
  SelectionMethod method = SelectionMethod::random;
  std::size_t budget = 0;
  double rmse = 0.0;         ///< mean over repeats of the pooled RMSE
  double rmse_stddev = 0.0;  ///< sample standard deviation over repeats, 0 for one run
  double mean_objective = 0.0;  ///< mean Trace((ridge I + P_B P_B')^{-1}) of the selections
  std::size_t items_evaluated = 0;
  std::size_t items_skipped = 0;
  double elapsed_ms = 0.0;  ///< mean selection time per item and run
};

struct SweepInput {
  const LatentModel* model = nullptr;
  const RatingDataset* train = nullptr;    ///< for frequent and edgy raters
  const RatingDataset* heldout = nullptr;  ///< ratings of the new items
  std::vector<std::string> new_items;
  /// Per-user noise variances indexed by model user; needed by bgs2 and GLS.
  std::optional<UserVariances> variances;
};

/// Rows in (method, budget) order. Items whose pool is smaller than the
/// budget, or whose selection or estimate fails, are skipped and counted;
/// a line naming each is written to `log` when given. Items are processed
/// on up to worker_count() threads with per-item seeds, so the result does
/// not depend on the thread count.
std::vector<SweepRow> run_sweep(const SweepInput& input, const SweepConfig& config,
                                std::ostream* log = nullptr);

struct SyntheticSweepConfig {
  SyntheticConfig data;
  std::size_t new_items = 100;
  std::uint64_t split_seed = 1;
  /// Select and weight with the generating variances instead of estimates.
  bool true_variances = false;
  /// Fit an LFM to the training items instead of using the generating model.
  bool train_model = false;
  TrainConfig training;
};

std::vector<SweepRow> run_synthetic_sweep(const SyntheticSweepConfig& synthetic,
                                          const SweepConfig& config, std::ostream* log = nullptr);

/// COLDSTART_THREADS when set to a positive integer, else the hardware concurrency.
std::size_t worker_count();

struct CsvOptions {
  bool full_precision = false;  ///< 17 significant digits instead of 6
  bool timing = false;          ///< write elapsed_ms; otherwise the column is 0
};

inline constexpr const char* kSweepCsvHeader =
    "method,budget,rmse,rmse_stddev,mean_objective,items_evaluated,items_skipped,elapsed_ms";

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows, const CsvOptions& options = {});

}  // namespace coldstart
