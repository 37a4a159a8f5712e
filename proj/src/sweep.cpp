#include "coldstart/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "coldstart/design.hpp"
#include "coldstart/evaluation.hpp"
#include "coldstart/numerics.hpp"

namespace coldstart {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = splitmix(base);
  for (std::uint64_t key : keys) s = splitmix(s ^ splitmix(key));
  return s;
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

struct PreparedItem {
  std::string label;
  std::optional<RaterPool> pool;
  std::vector<Rating> ratings;  ///< aligned with pool->users
  std::string problem;          ///< why the item has no pool
};

struct Outcome {
  bool skipped = false;
  std::string reason;
  double sse = 0.0;
  std::size_t count = 0;
  double objective = 0.0;
  double elapsed_ms = 0.0;
};

Outcome evaluate_item(const SweepInput& input, const SweepConfig& config, const PreparedItem& item,
                      const std::optional<RaterPool>& selection_pool, SelectionMethod method,
                      std::size_t budget, std::uint64_t seed) {
  Outcome out;
  if (!item.pool) {
    out.skipped = true;
    out.reason = item.problem;
    return out;
  }
  const RaterPool& pool = *item.pool;
  if (budget > pool.size()) {
    out.skipped = true;
    out.reason = "pool of " + std::to_string(pool.size()) + " users is below the budget";
    return out;
  }
  const LatentModel& model = *input.model;
  const std::size_t d = model.k() + 1;
  try {
    SelectionRequest request;
    request.method = method;
    request.budget = budget;
    request.ridge = config.selection_ridge.value_or(design::default_design_ridge(d));
    request.seed = seed;
    request.greedy.thinning_cap = config.thinning_cap;
    request.cluster.mode = config.cluster_mode;
    request.cluster.clusters = config.clusters;
    request.train = input.train;
    request.heldout = input.heldout;
    const SelectionResult selection = select(selection_pool ? *selection_pool : pool, request);
    out.elapsed_ms = std::chrono::duration<double, std::milli>(selection.elapsed).count();

    const std::vector<std::size_t> positions = pool.positions(selection.selected);
    design::DesignObjective a_opt;
    a_opt.ridge = request.ridge;
    out.objective = design::objective_at(a_opt, pool, positions);

    std::vector<char> chosen(pool.size(), 0);
    std::vector<Rating> revealed_ratings;
    std::vector<double> raw;
    for (std::size_t p : positions) {
      chosen[p] = 1;
      revealed_ratings.push_back(item.ratings[p]);
      raw.push_back(item.ratings[p].value);
    }
    const EstimatorKind kind = estimator_for(config, method);
    std::span<const double> variances;
    if (kind == EstimatorKind::gls) {
      if (!input.variances) throw Error("GLS needs user variances");
      variances = input.variances->values;
    }
    const RevealedRatings revealed = make_revealed(model, revealed_ratings, variances);
    const double ridge = config.estimation_ridge.value_or(default_estimation_ridge(budget, model.k()));
    ItemEstimate estimate;
    switch (kind) {
      case EstimatorKind::ls: estimate = least_squares_estimate(revealed, ridge); break;
      case EstimatorKind::gls: estimate = gls_estimate(revealed, ridge); break;
      case EstimatorKind::similarity:
        estimate = similarity_estimate(revealed, raw, model, config.similarity_gamma);
        break;
    }

    std::vector<Prediction> predictions;
    // With the whole pool revealed there is no remainder; score the fit on the revealed users.
    const bool in_sample = budget == pool.size();
    for (std::size_t p = 0; p < pool.size(); ++p) {
      if (chosen[p] && !in_sample) continue;
      predictions.push_back({predict_new_item(model, estimate, pool.users[p]), item.ratings[p].value});
    }
    std::optional<RatingScale> clamp;
    if (config.clamp_predictions) clamp = input.heldout->scale();
    out.sse = squared_error_sum(predictions, clamp);
    out.count = predictions.size();
  } catch (const Error& e) {
    out = Outcome{};
    out.skipped = true;
    out.reason = e.what();
  }
  return out;
}

}  // namespace

std::size_t worker_count() {
  if (const char* env = std::getenv("COLDSTART_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<std::size_t>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void validate(const SweepConfig& config) {
  if (config.budgets.empty()) throw Error("sweep needs at least one budget");
  if (config.methods.empty()) throw Error("sweep needs at least one method");
  if (config.repeats < 1) throw Error("repeats must be at least 1");
  for (std::size_t i = 0; i < config.budgets.size(); ++i) {
    if (config.budgets[i] < 1) throw Error("budgets must be positive");
    if (i > 0 && config.budgets[i] <= config.budgets[i - 1]) {
      throw Error("budgets must be strictly ascending");
    }
  }
}

EstimatorKind estimator_for(const SweepConfig& config, SelectionMethod method) {
  if (auto it = config.estimator_by_method.find(method); it != config.estimator_by_method.end()) {
    return it->second;
  }
  if (config.estimator) return *config.estimator;
  return method == SelectionMethod::bgs2 ? EstimatorKind::gls : EstimatorKind::ls;
}

std::vector<SweepRow> run_sweep(const SweepInput& input, const SweepConfig& config,
                                std::ostream* log) {
  validate(config);
  if (!input.model || !input.heldout) throw Error("sweep needs a model and held-out ratings");
  if (input.new_items.empty()) throw Error("sweep needs at least one new item");
  const std::size_t item_count = config.n_items_evaluated == 0
                                     ? input.new_items.size()
                                     : std::min(config.n_items_evaluated, input.new_items.size());
  if (config.n_items_evaluated > input.new_items.size()) {
    throw Error("sweep asks for " + std::to_string(config.n_items_evaluated) + " items but only " +
                std::to_string(input.new_items.size()) + " are new");
  }

  std::optional<Eigen::MatrixXd> whitening;
  if (config.whiten) whitening = numerics::whiten(augmented_users(*input.model)).transform;

  std::vector<PreparedItem> items(item_count);
  std::vector<std::optional<RaterPool>> selection_pools(item_count);
  parallel_for(item_count, [&](std::size_t i) {
    PreparedItem& item = items[i];
    item.label = input.new_items[i];
    try {
      RaterPool pool = rater_pool(*input.heldout, *input.model, item.label);
      if (input.variances) attach_variances(pool, input.variances->values, input.variances->floor);
      item.ratings = pool_ratings(pool, *input.heldout);
      if (whitening) selection_pools[i] = design::transform_pool(pool, *whitening);
      item.pool = std::move(pool);
    } catch (const Error& e) {
      item.problem = e.what();
    }
  });

  std::vector<SweepRow> rows;
  for (SelectionMethod method : config.methods) {
    const std::size_t repeats = is_stochastic(method) ? config.repeats : 1;
    for (std::size_t budget : config.budgets) {
      SweepRow row;
      row.method = method;
      row.budget = budget;
      std::vector<double> rmses;
      double objective_sum = 0.0;
      double elapsed_sum = 0.0;
      std::size_t evaluated_runs = 0;
      for (std::size_t rep = 0; rep < repeats; ++rep) {
        std::vector<Outcome> outcomes(item_count);
        parallel_for(item_count, [&](std::size_t i) {
          const std::uint64_t seed = stream_seed(
              config.seed, {static_cast<std::uint64_t>(method), budget, rep, i});
          outcomes[i] = evaluate_item(input, config, items[i], selection_pools[i], method, budget, seed);
        });
        double sse = 0.0;
        std::size_t count = 0;
        std::size_t evaluated = 0;
        for (std::size_t i = 0; i < item_count; ++i) {
          const Outcome& o = outcomes[i];
          if (o.skipped) {
            if (rep == 0 && log) {
              *log << "warning: " << to_string(method) << " B=" << budget << " skipped item "
                   << items[i].label << ": " << o.reason << '\n';
            }
            continue;
          }
          ++evaluated;
          sse += o.sse;
          count += o.count;
          objective_sum += o.objective;
          elapsed_sum += o.elapsed_ms;
          ++evaluated_runs;
        }
        if (rep == 0) {
          row.items_evaluated = evaluated;
          row.items_skipped = item_count - evaluated;
        }
        rmses.push_back(count > 0 ? std::sqrt(sse / static_cast<double>(count))
                                  : std::numeric_limits<double>::quiet_NaN());
      }
      double mean = 0.0;
      for (double r : rmses) mean += r;
      mean /= static_cast<double>(rmses.size());
      double ss = 0.0;
      for (double r : rmses) ss += (r - mean) * (r - mean);
      row.rmse = mean;
      row.rmse_stddev = rmses.size() > 1 ? std::sqrt(ss / static_cast<double>(rmses.size() - 1)) : 0.0;
      if (evaluated_runs > 0) {
        row.mean_objective = objective_sum / static_cast<double>(evaluated_runs);
        row.elapsed_ms = elapsed_sum / static_cast<double>(evaluated_runs);
      } else {
        row.mean_objective = std::numeric_limits<double>::quiet_NaN();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<SweepRow> run_synthetic_sweep(const SyntheticSweepConfig& synthetic,
                                          const SweepConfig& config, std::ostream* log) {
  const SyntheticData data = generate_synthetic(synthetic.data);
  ItemSplit split = split_items(data.dataset, synthetic.new_items, synthetic.split_seed);
  const LatentModel model =
      synthetic.train_model ? train_lfm(split.train, synthetic.training) : data.truth;

  UserVariances variances;
  if (synthetic.true_variances) {
    variances.floor = 0.0;
    variances.values.resize(model.user_count());
    for (std::size_t u = 0; u < model.user_count(); ++u) {
      const auto truth_user = data.truth.users().find(model.users().label(u));
      if (!truth_user) throw Error("model user missing from the generating model");
      variances.values[u] = data.true_variances.values[*truth_user];
    }
  } else {
    variances = estimate_user_variances(model, split.train);
  }

  SweepInput input;
  input.model = &model;
  input.train = &split.train;
  input.heldout = &split.heldout;
  input.new_items = split.new_items;
  input.variances = std::move(variances);
  return run_sweep(input, config, log);
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows, const CsvOptions& options) {
  std::ostringstream buffer;
  buffer << std::setprecision(options.full_precision ? 17 : 6);
  buffer << kSweepCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    buffer << to_string(r.method) << ',' << r.budget << ',' << r.rmse << ',' << r.rmse_stddev << ','
           << r.mean_objective << ',' << r.items_evaluated << ',' << r.items_skipped << ','
           << (options.timing ? r.elapsed_ms : 0.0) << '\n';
  }
  out << buffer.str();
}

}  // namespace coldstart
