// Command-line front end: train, synth, select, estimate, sweep, diagnose, oracle.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coldstart/data.hpp"
#include "coldstart/design.hpp"
#include "coldstart/estimators.hpp"
#include "coldstart/lfm.hpp"
#include "coldstart/numerics.hpp"
#include "coldstart/selection.hpp"
#include "coldstart/sweep.hpp"
#include "coldstart/sweep_config.hpp"
#include "coldstart/synthetic.hpp"

using namespace coldstart;

namespace {

struct RatingsArgs {
  std::string path;
  std::string format = "csv";
  std::string scale = "1:5";

  void add(CLI::App* app, const std::string& flag, const std::string& help) {
    app->add_option(flag, path, help)->required();
    app->add_option("--format", format, "csv or movielens")->capture_default_str();
    app->add_option("--scale", scale, "rating scale MIN:MAX")->capture_default_str();
  }
  RatingDataset load() const { return load_ratings(path, parse_format(format), parse_scale(scale)); }
};

void add_training(CLI::App* app, TrainConfig& t) {
  app->add_option("--k", t.k, "latent dimension")->capture_default_str();
  app->add_option("--epochs", t.epochs)->capture_default_str();
  app->add_option("--learning-rate", t.base_learning_rate)->capture_default_str();
  app->add_option("--l2", t.l2_penalty)->capture_default_str();
  app->add_option("--seed", t.seed)->capture_default_str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << std::setprecision(17);
  return out;
}

UserVariances load_variances(const std::string& path, const LatentModel& model) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_variances(in, model);
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  RatingsArgs ratings;
  TrainConfig training;
  std::string model_out;
  std::string variances_out;
  std::size_t heldout = 0;
  std::uint64_t split_seed = 1;
  bool quiet = false;
};

void train_command(const TrainArgs& a) {
  RatingDataset data = a.ratings.load();
  if (a.heldout > 0) data = split_items(data, a.heldout, a.split_seed).train;
  std::vector<double> rmse;
  const LatentModel model = train_lfm(data, a.training, &rmse);
  if (!a.quiet) {
    for (std::size_t e = 0; e < rmse.size(); ++e) std::cerr << "epoch " << e + 1 << " rmse " << rmse[e] << '\n';
  }
  save_model(a.model_out, model);
  if (!a.variances_out.empty()) {
    std::ofstream out = open_out(a.variances_out);
    save_variances(out, model, estimate_user_variances(model, data));
  }
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  SyntheticConfig config;
  std::string noise = "iid";
  std::string ratings_out;
  std::string model_out;
  std::string variances_out;
};

void synth_command(SynthArgs a) {
  if (a.noise == "iid") a.config.noise = NoiseKind::iid;
  else if (a.noise == "per_user") a.config.noise = NoiseKind::per_user;
  else throw Error("noise must be iid or per_user");
  const SyntheticData data = generate_synthetic(a.config);
  {
    std::ofstream out = open_out(a.ratings_out);
    write_ratings(out, data.dataset, RatingFormat::csv);
  }
  if (!a.model_out.empty()) save_model(a.model_out, data.truth);
  if (!a.variances_out.empty()) {
    std::ofstream out = open_out(a.variances_out);
    save_variances(out, data.truth, data.true_variances);
  }
}

// ---- select ---------------------------------------------------------------

struct SelectArgs {
  std::string model;
  RatingsArgs heldout;
  std::string item;
  std::size_t budget = 10;
  std::string method = "bgs1";
  std::optional<double> ridge;
  std::uint64_t seed = 1;
  std::string variances;
  std::string train;
  std::string cluster_mode = "proportional";
  std::size_t clusters = 0;
  bool whiten = false;
};

void select_command(const SelectArgs& a) {
  const LatentModel model = load_model(a.model);
  const RatingDataset heldout = a.heldout.load();
  RaterPool pool = rater_pool(heldout, model, a.item);
  if (!a.variances.empty()) {
    const UserVariances v = load_variances(a.variances, model);
    attach_variances(pool, v.values, v.floor);
  }
  std::optional<RatingDataset> train;
  if (!a.train.empty()) train = load_ratings(a.train, parse_format(a.heldout.format), parse_scale(a.heldout.scale));

  SelectionRequest request;
  request.method = parse_method(a.method);
  request.budget = a.budget;
  request.ridge = a.ridge.value_or(design::default_design_ridge(pool.dimension()));
  request.seed = a.seed;
  request.cluster.mode = a.cluster_mode == "one_per_cluster" ? ClusterMode::one_per_cluster : ClusterMode::proportional;
  request.cluster.clusters = a.clusters;
  request.train = train ? &*train : nullptr;
  request.heldout = &heldout;
  const SelectionResult r =
      a.whiten ? select(design::transform_pool(pool, numerics::whiten(augmented_users(model)).transform), request)
               : select(pool, request);

  design::DesignObjective objective;
  objective.ridge = request.ridge;
  std::cout << std::setprecision(10);
  std::cout << "# item " << a.item << ", pool " << pool.size() << ", method " << to_string(r.method)
            << ", objective " << design::objective_value(objective, pool, r.selected) << '\n';
  for (std::size_t u : r.selected) std::cout << model.users().label(u) << '\n';
}

// ---- estimate -------------------------------------------------------------

struct EstimateArgs {
  std::string model;
  RatingsArgs ratings;
  std::string item;
  std::string estimator = "ls";
  std::optional<double> ridge;
  std::string variances;
  std::string users;
  double gamma = 4.0;
  bool predict = false;
};

void estimate_command(const EstimateArgs& a) {
  const LatentModel model = load_model(a.model);
  const RatingDataset data = a.ratings.load();
  const RaterPool pool = rater_pool(data, model, a.item);
  std::vector<std::size_t> subset = pool.users;
  if (!a.users.empty()) {
    std::ifstream in(a.users);
    if (!in) throw Error("cannot open " + a.users);
    subset.clear();
    for (std::string label; std::getline(in, label);) {
      if (label.empty() || label[0] == '#') continue;
      subset.push_back(model.users().at(label));
    }
  }
  const Reveal rv = reveal(pool, subset, data);
  std::vector<double> variances;
  if (!a.variances.empty()) variances = load_variances(a.variances, model).values;
  const RevealedRatings revealed = make_revealed(model, rv.revealed, variances);
  const double ridge = a.ridge.value_or(default_estimation_ridge(revealed.size(), model.k()));
  ItemEstimate e;
  switch (parse_estimator(a.estimator)) {
    case EstimatorKind::ls: e = least_squares_estimate(revealed, ridge); break;
    case EstimatorKind::gls: e = gls_estimate(revealed, ridge); break;
    case EstimatorKind::similarity: {
      std::vector<double> raw;
      for (const Rating& r : rv.revealed) raw.push_back(r.value);
      e = similarity_estimate(revealed, raw, model, a.gamma);
      break;
    }
  }
  std::cout << std::setprecision(17);
  std::cout << "item " << a.item << " revealed " << revealed.size() << " method " << to_string(e.method) << '\n';
  std::cout << "bias " << e.bias << '\n' << "factors";
  for (Eigen::Index f = 0; f < e.factors.size(); ++f) std::cout << ' ' << e.factors(f);
  std::cout << '\n';
  if (a.predict) {
    for (const Rating& r : rv.remainder) {
      std::cout << model.users().label(r.user) << ',' << predict_new_item(model, e, r.user) << ',' << r.value << '\n';
    }
  }
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string out;
  bool full_precision = false;
  bool timing = false;
  std::string estimator;
};

std::vector<SweepRow> sweep_from_data(const DataSource& source, const SweepConfig& sweep) {
  const RatingDataset data = load_ratings(source.ratings, source.format, source.scale);
  const ItemSplit split = split_items(data, source.heldout_items, source.split_seed);
  const LatentModel model = source.model ? load_model(*source.model) : train_lfm(split.train, source.training);
  SweepInput input;
  input.model = &model;
  input.train = &split.train;
  input.heldout = &split.heldout;
  input.new_items = split.new_items;
  input.variances = estimate_user_variances(model, split.train);
  return run_sweep(input, sweep, &std::cerr);
}

void sweep_command(const SweepArgs& a) {
  SweepFile file = load_sweep_config(a.config);
  if (!a.estimator.empty()) {
    file.sweep.estimator = parse_estimator(a.estimator);
    file.sweep.estimator_by_method.clear();
  }
  std::vector<SweepRow> rows;
  if (file.data) {
    rows = sweep_from_data(*file.data, file.sweep);
  } else {
    rows = run_synthetic_sweep(file.synthetic.value_or(SyntheticSweepConfig{}), file.sweep, &std::cerr);
  }
  const CsvOptions options{a.full_precision, a.timing};
  if (a.out.empty()) {
    write_sweep_csv(std::cout, rows, options);
  } else {
    std::ofstream out = open_out(a.out);
    write_sweep_csv(out, rows, options);
  }
}

// ---- diagnose -------------------------------------------------------------

struct DiagnoseArgs {
  std::string model;
  std::string ratings;
  std::string format = "csv";
  std::string scale = "1:5";
  std::string item;
  std::size_t random_pool = 0;
  std::size_t k = 2;
  std::uint64_t seed = 1;
  std::optional<double> ridge;
  std::string variances;
  std::size_t samples = 10000;
};

void diagnose_command(const DiagnoseArgs& a) {
  RaterPool pool;
  if (a.random_pool > 0) {
    std::mt19937_64 rng(a.seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> sd(0.2, 0.8);
    pool.item = "random";
    pool.vectors.resize(static_cast<Eigen::Index>(a.k + 1), static_cast<Eigen::Index>(a.random_pool));
    for (std::size_t c = 0; c < a.random_pool; ++c) {
      pool.users.push_back(c);
      pool.labels.push_back("u" + std::to_string(c));
      pool.vectors(0, static_cast<Eigen::Index>(c)) = 1.0;
      for (std::size_t r = 1; r <= a.k; ++r) pool.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = g(rng);
      const double s = sd(rng);
      pool.variances.push_back(s * s);
    }
  } else {
    if (a.model.empty() || a.ratings.empty() || a.item.empty()) {
      throw Error("diagnose needs --model, --ratings and --item, or --random-pool");
    }
    const LatentModel model = load_model(a.model);
    const RatingDataset data = load_ratings(a.ratings, parse_format(a.format), parse_scale(a.scale));
    pool = rater_pool(data, model, a.item);
    if (!a.variances.empty()) {
      const UserVariances v = load_variances(a.variances, model);
      attach_variances(pool, v.values, v.floor);
    }
  }
  design::DesignObjective objective;
  objective.ridge = a.ridge.value_or(design::default_design_ridge(pool.dimension()));
  std::vector<design::DesignObjective> kinds = {objective};
  if (pool.has_variances()) {
    kinds.push_back(objective);
    kinds.back().kind = design::ObjectiveKind::weighted_a_opt;
  }
  std::cout << std::setprecision(8);
  std::cout << "pool " << pool.item << " users " << pool.size() << " dimension " << pool.dimension()
            << " ridge " << objective.ridge << '\n';
  for (const auto& o : kinds) {
    const design::SteepnessReport s = design::steepness(pool, o);
    const design::SetFunctionReport sm = design::check_supermodular(pool, o, a.seed, a.samples);
    std::cout << design::to_string(o.kind) << ": s " << s.s << " t " << s.t << " factor "
              << s.approximation_factor() << (s.exact ? "" : " (lower bound)") << " argmax "
              << pool.labels.at(std::find(pool.users.begin(), pool.users.end(), s.argmax_user) - pool.users.begin())
              << '\n';
    std::cout << "  supermodularity: " << sm.violations << " violations of " << sm.checked
              << (pool.size() <= design::kExhaustiveLimit ? " (exhaustive)" : " (sampled)") << ", worst excess "
              << sm.worst_excess << '\n';
    if (pool.size() <= design::kExhaustiveLimit) {
      const design::PhiTable table(pool, o);
      const auto mono = design::check_monotone_decreasing([&](std::uint32_t m) { return table(m); }, pool.size());
      std::cout << "  monotonicity: " << mono.violations << " violations of " << mono.checked << '\n';
    }
  }
}

// ---- oracle ---------------------------------------------------------------

struct OracleArgs {
  std::size_t users = 500;
  std::size_t k = 3;
  std::size_t budget = 10;
  double sigma = 0.5;
  bool hetero = false;
  std::size_t trials = 20000;
  std::uint64_t seed = 1;
};

void oracle_command(const OracleArgs& a) {
  SyntheticConfig c;
  c.n_users = a.users;
  c.n_items = 1;
  c.raters_per_item = 1;
  c.k = a.k;
  c.isotropic = true;
  c.sigma = a.sigma;
  c.noise = a.hetero ? NoiseKind::per_user : NoiseKind::iid;
  c.seed = a.seed;
  const SyntheticData data = generate_synthetic(c);
  std::vector<std::size_t> all(a.users);
  for (std::size_t u = 0; u < a.users; ++u) all[u] = u;
  RaterPool pool = pool_from_users(data.truth, "i0", all);
  std::vector<double> noise = a.hetero ? data.true_variances.values : std::vector<double>(a.users, a.sigma * a.sigma);
  pool.variances = noise;
  const std::vector<std::size_t> subset = random_select(pool, a.budget, a.seed).selected;

  MonteCarloOptions mc;
  mc.estimator = a.hetero ? EstimatorKind::gls : EstimatorKind::ls;
  mc.trials = a.trials;
  mc.seed = a.seed + 1;
  const double simulated = monte_carlo_expected_mse(data.truth, pool, subset, all, noise, mc);
  design::DesignObjective o;
  if (a.hetero) o.kind = design::ObjectiveKind::weighted_a_opt;
  else o.sigma2 = a.sigma * a.sigma;
  const double predicted = design::expected_mse(o, pool, subset, noise);
  std::cout << std::setprecision(8) << "monte_carlo " << simulated << "\nformula " << predicted
            << "\nrelative_difference " << std::abs(simulated - predicted) / predicted << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rater selection for cold-start items"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "fit a latent factor model to a rating file");
  train.ratings.add(t, "--ratings", "rating file");
  add_training(t, train.training);
  t->add_option("--out", train.model_out, "model file to write")->required();
  t->add_option("--variances-out", train.variances_out, "write per-user residual variances");
  t->add_option("--heldout-items", train.heldout, "hold out this many items before training");
  t->add_option("--split-seed", train.split_seed)->capture_default_str();
  t->add_flag("--quiet", train.quiet, "no per-epoch RMSE");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate ratings from a random factor model");
  s->add_option("--users", synth.config.n_users)->capture_default_str();
  s->add_option("--items", synth.config.n_items)->capture_default_str();
  s->add_option("--k", synth.config.k)->capture_default_str();
  s->add_option("--raters-per-item", synth.config.raters_per_item)->capture_default_str();
  s->add_option("--noise", synth.noise, "iid or per_user")->capture_default_str();
  s->add_option("--sigma", synth.config.sigma)->capture_default_str();
  s->add_option("--sigma-min", synth.config.sigma_min)->capture_default_str();
  s->add_option("--sigma-max", synth.config.sigma_max)->capture_default_str();
  s->add_option("--factor-scale", synth.config.factor_scale)->capture_default_str();
  s->add_flag("--isotropic", synth.config.isotropic);
  s->add_flag("--quantize", synth.config.quantize);
  s->add_option("--seed", synth.config.seed)->capture_default_str();
  s->add_option("--out", synth.ratings_out, "CSV rating file to write")->required();
  s->add_option("--model-out", synth.model_out, "write the generating model");
  s->add_option("--variances-out", synth.variances_out, "write the generating variances");

  SelectArgs sel;
  auto* se = app.add_subcommand("select", "choose raters for a new item");
  se->add_option("--model", sel.model)->required();
  sel.heldout.add(se, "--ratings", "ratings of the new item");
  se->add_option("--item", sel.item)->required();
  se->add_option("--budget", sel.budget)->capture_default_str();
  se->add_option("--method", sel.method)->capture_default_str();
  se->add_option("--ridge", sel.ridge, "default 1e-6 (k+1)");
  se->add_option("--seed", sel.seed)->capture_default_str();
  se->add_option("--variances", sel.variances, "per-user variance file (bgs2)");
  se->add_option("--train", sel.train, "training ratings (frequent, edgy)");
  se->add_option("--cluster-mode", sel.cluster_mode)->capture_default_str();
  se->add_option("--clusters", sel.clusters);
  se->add_flag("--whiten", sel.whiten, "select on population-whitened user vectors");

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "estimate a new item from revealed ratings");
  e->add_option("--model", est.model)->required();
  est.ratings.add(e, "--ratings", "ratings of the new item");
  e->add_option("--item", est.item)->required();
  e->add_option("--estimator", est.estimator, "ls, gls or similarity")->capture_default_str();
  e->add_option("--ridge", est.ridge, "default 0.1 when B < 2(k+1), else 1e-6 (k+1)");
  e->add_option("--variances", est.variances, "per-user variance file (gls)");
  e->add_option("--users", est.users, "file of revealed user labels; default all raters");
  e->add_option("--gamma", est.gamma, "similarity threshold")->capture_default_str();
  e->add_flag("--predict", est.predict, "print user,predicted,actual for unrevealed raters");

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "run a budget sweep and write CSV");
  w->add_option("--config", sw.config, "sweep configuration file")->required();
  w->add_option("--out", sw.out, "CSV file; default stdout");
  w->add_flag("--full-precision", sw.full_precision, "17 significant digits");
  w->add_flag("--timing", sw.timing, "fill elapsed_ms");
  w->add_option("--estimator", sw.estimator, "use this estimator for every method");

  DiagnoseArgs diag;
  auto* d = app.add_subcommand("diagnose", "steepness and supermodularity of one pool");
  d->add_option("--model", diag.model);
  d->add_option("--ratings", diag.ratings);
  d->add_option("--format", diag.format)->capture_default_str();
  d->add_option("--scale", diag.scale)->capture_default_str();
  d->add_option("--item", diag.item);
  d->add_option("--random-pool", diag.random_pool, "use a random Gaussian pool of this size instead");
  d->add_option("--k", diag.k, "dimension of the random pool")->capture_default_str();
  d->add_option("--seed", diag.seed)->capture_default_str();
  d->add_option("--ridge", diag.ridge, "default 1e-6 (k+1)");
  d->add_option("--variances", diag.variances);
  d->add_option("--samples", diag.samples, "sampled triples above 12 users")->capture_default_str();

  OracleArgs orc;
  auto* o = app.add_subcommand("oracle", "Monte Carlo expected MSE against the closed form");
  o->add_option("--users", orc.users)->capture_default_str();
  o->add_option("--k", orc.k)->capture_default_str();
  o->add_option("--budget", orc.budget)->capture_default_str();
  o->add_option("--sigma", orc.sigma)->capture_default_str();
  o->add_flag("--hetero", orc.hetero, "per-user noise and GLS");
  o->add_option("--trials", orc.trials)->capture_default_str();
  o->add_option("--seed", orc.seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*t) train_command(train);
    else if (*s) synth_command(synth);
    else if (*se) select_command(sel);
    else if (*e) estimate_command(est);
    else if (*w) sweep_command(sw);
    else if (*d) diagnose_command(diag);
    else if (*o) oracle_command(orc);
  } catch (const ParseError& err) {
    std::cerr << "error";
    if (err.line() > 0) std::cerr << " (line " << err.line() << ")";
    std::cerr << ": " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
