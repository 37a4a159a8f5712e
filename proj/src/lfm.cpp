#include "coldstart/lfm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace coldstart {

namespace {

constexpr const char* kModelMagic = "coldstart-lfm";
constexpr const char* kVarianceMagic = "coldstart-variances";
constexpr int kFormatVersion = 1;

double training_rmse(const LatentModel& model, const RatingDataset& train) {
  double sum = 0.0;
  for (const Rating& r : train.ratings()) {
    const double e = r.value - predict(model, r.user, r.item);
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(train.size()));
}

void check_label(const std::string& label) {
  if (label.empty() || label.find_first_of(" \t\r\n") != std::string::npos) {
    throw Error("identifier '" + label + "' cannot be stored in a text model file");
  }
}

void expect_token(std::istream& in, const std::string& expected) {
  std::string token;
  if (!(in >> token) || token != expected) {
    throw Error("model file: expected '" + expected + "', found '" + token + "'");
  }
}

}  // namespace

LatentModel::LatentModel(IdIndex users, IdIndex items, std::size_t k, double mu_)
    : mu(mu_),
      user_bias(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(users.size()))),
      item_bias(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(items.size()))),
      user_factors(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                         static_cast<Eigen::Index>(users.size()))),
      item_factors(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                         static_cast<Eigen::Index>(items.size()))),
      users_(std::move(users)),
      items_(std::move(items)) {}

LatentModel train_lfm(const RatingDataset& train, const TrainConfig& config,
                      std::vector<double>* epoch_rmse) {
  if (train.empty()) throw Error("cannot train on an empty dataset");
  if (config.k < 1) throw Error("latent dimension must be at least 1");
  if (config.epochs < 1) throw Error("epochs must be at least 1");
  if (!(config.base_learning_rate > 0.0)) throw Error("learning rate must be positive");
  if (!(config.l2_penalty >= 0.0)) throw Error("l2 penalty must be nonnegative");

  double mean = 0.0;
  for (const Rating& r : train.ratings()) mean += r.value;
  mean /= static_cast<double>(train.size());

  LatentModel model(train.users(), train.items(), config.k, mean);
  std::mt19937_64 rng(config.seed);
  const double bound = 0.5 / std::sqrt(static_cast<double>(config.k));
  std::uniform_real_distribution<double> init(-bound, bound);
  for (Eigen::Index c = 0; c < model.user_factors.cols(); ++c)
    for (Eigen::Index f = 0; f < model.user_factors.rows(); ++f) model.user_factors(f, c) = init(rng);
  for (Eigen::Index c = 0; c < model.item_factors.cols(); ++c)
    for (Eigen::Index f = 0; f < model.item_factors.rows(); ++f) model.item_factors(f, c) = init(rng);

  // AdaGrad accumulators, one per parameter.
  Eigen::VectorXd acc_bu = Eigen::VectorXd::Zero(model.user_bias.size());
  Eigen::VectorXd acc_bi = Eigen::VectorXd::Zero(model.item_bias.size());
  Eigen::MatrixXd acc_p = Eigen::MatrixXd::Zero(model.user_factors.rows(), model.user_factors.cols());
  Eigen::MatrixXd acc_q = Eigen::MatrixXd::Zero(model.item_factors.rows(), model.item_factors.cols());

  const double lr = config.base_learning_rate;
  const double l2 = config.l2_penalty;
  const double eps = config.accumulator_epsilon;
  const Eigen::Index k = static_cast<Eigen::Index>(config.k);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (epoch_rmse) epoch_rmse->clear();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t n : order) {
      const Rating& r = train.ratings()[n];
      const auto u = static_cast<Eigen::Index>(r.user);
      const auto i = static_cast<Eigen::Index>(r.item);
      const double err = r.value - (model.mu + model.user_bias(u) + model.item_bias(i) +
                                    model.item_factors.col(i).dot(model.user_factors.col(u)));

      const double g_bu = -err + l2 * model.user_bias(u);
      const double g_bi = -err + l2 * model.item_bias(i);
      acc_bu(u) += g_bu * g_bu;
      acc_bi(i) += g_bi * g_bi;
      model.user_bias(u) -= lr * g_bu / std::sqrt(acc_bu(u) + eps);
      model.item_bias(i) -= lr * g_bi / std::sqrt(acc_bi(i) + eps);

      for (Eigen::Index f = 0; f < k; ++f) {
        const double p = model.user_factors(f, u);
        const double q = model.item_factors(f, i);
        const double g_p = -err * q + l2 * p;
        const double g_q = -err * p + l2 * q;
        acc_p(f, u) += g_p * g_p;
        acc_q(f, i) += g_q * g_q;
        model.user_factors(f, u) = p - lr * g_p / std::sqrt(acc_p(f, u) + eps);
        model.item_factors(f, i) = q - lr * g_q / std::sqrt(acc_q(f, i) + eps);
      }
    }
    const double rmse = training_rmse(model, train);
    if (!std::isfinite(rmse)) {
      throw Error("training diverged at epoch " + std::to_string(epoch));
    }
    if (epoch_rmse) epoch_rmse->push_back(rmse);
  }
  return model;
}

double predict(const LatentModel& model, std::size_t user, std::size_t item) {
  if (user >= model.user_count()) throw Error("unknown user index " + std::to_string(user));
  if (item >= model.item_count()) throw Error("unknown item index " + std::to_string(item));
  const auto u = static_cast<Eigen::Index>(user);
  const auto i = static_cast<Eigen::Index>(item);
  return model.mu + model.item_bias(i) + model.user_bias(u) +
         model.item_factors.col(i).dot(model.user_factors.col(u));
}

Eigen::VectorXd augment(const LatentModel& model, std::size_t user) {
  if (user >= model.user_count()) throw Error("unknown user index " + std::to_string(user));
  Eigen::VectorXd v(static_cast<Eigen::Index>(model.k() + 1));
  v(0) = 1.0;
  v.tail(static_cast<Eigen::Index>(model.k())) =
      model.user_factors.col(static_cast<Eigen::Index>(user));
  return v;
}

Eigen::MatrixXd augmented_users(const LatentModel& model) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(model.k() + 1), static_cast<Eigen::Index>(model.user_count()));
  out.row(0).setOnes();
  out.bottomRows(static_cast<Eigen::Index>(model.k())) = model.user_factors;
  return out;
}

UserVariances estimate_user_variances(const LatentModel& model, const RatingDataset& train,
                                      double floor, std::size_t min_ratings) {
  if (!(floor > 0.0)) throw Error("variance floor must be positive");
  std::vector<double> sum(model.user_count(), 0.0);
  std::vector<std::size_t> count(model.user_count(), 0);
  double total = 0.0;
  std::size_t total_count = 0;

  // Dataset indices are mapped to model indices through the labels.
  std::vector<std::optional<std::size_t>> user_map(train.users().size());
  std::vector<std::optional<std::size_t>> item_map(train.items().size());
  for (std::size_t u = 0; u < user_map.size(); ++u) user_map[u] = model.users().find(train.users().label(u));
  for (std::size_t i = 0; i < item_map.size(); ++i) item_map[i] = model.items().find(train.items().label(i));

  for (const Rating& r : train.ratings()) {
    if (!user_map[r.user] || !item_map[r.item]) continue;
    const double e = r.value - predict(model, *user_map[r.user], *item_map[r.item]);
    sum[*user_map[r.user]] += e * e;
    ++count[*user_map[r.user]];
    total += e * e;
    ++total_count;
  }
  const double global = total_count > 0 ? total / static_cast<double>(total_count) : floor;

  UserVariances out;
  out.floor = floor;
  out.values.resize(model.user_count());
  for (std::size_t u = 0; u < model.user_count(); ++u) {
    const double v = (count[u] >= min_ratings && count[u] > 0)
                         ? sum[u] / static_cast<double>(count[u])
                         : global;
    out.values[u] = std::max(v, floor);
  }
  return out;
}

void save_model(std::ostream& out, const LatentModel& model) {
  const auto old_precision = out.precision(17);
  const Eigen::Index k = static_cast<Eigen::Index>(model.k());
  out << kModelMagic << ' ' << kFormatVersion << '\n';
  out << "k " << k << '\n';
  out << "mu " << model.mu << '\n';
  out << "users " << model.user_count() << '\n';
  for (std::size_t u = 0; u < model.user_count(); ++u) {
    check_label(model.users().label(u));
    out << model.users().label(u) << ' ' << model.user_bias(static_cast<Eigen::Index>(u));
    for (Eigen::Index f = 0; f < k; ++f) out << ' ' << model.user_factors(f, static_cast<Eigen::Index>(u));
    out << '\n';
  }
  out << "items " << model.item_count() << '\n';
  for (std::size_t i = 0; i < model.item_count(); ++i) {
    check_label(model.items().label(i));
    out << model.items().label(i) << ' ' << model.item_bias(static_cast<Eigen::Index>(i));
    for (Eigen::Index f = 0; f < k; ++f) out << ' ' << model.item_factors(f, static_cast<Eigen::Index>(i));
    out << '\n';
  }
  out.precision(old_precision);
  if (!out) throw Error("failed to write model");
}

LatentModel read_model(std::istream& in) {
  expect_token(in, kModelMagic);
  int version = 0;
  if (!(in >> version) || version != kFormatVersion) {
    throw Error("unsupported model format version " + std::to_string(version));
  }
  std::size_t k = 0, n = 0, m = 0;
  double mu = 0.0;
  expect_token(in, "k");
  if (!(in >> k) || k < 1) throw Error("model file: invalid k");
  expect_token(in, "mu");
  if (!(in >> mu)) throw Error("model file: invalid mu");

  const auto read_rows = [&](IdIndex& index, std::vector<double>& bias, std::vector<double>& factors,
                             std::size_t rows) {
    for (std::size_t r = 0; r < rows; ++r) {
      std::string label;
      double b = 0.0;
      if (!(in >> label >> b)) throw Error("model file: truncated row " + std::to_string(r));
      if (index.intern(label) != r) throw Error("model file: duplicate identifier '" + label + "'");
      bias.push_back(b);
      for (std::size_t f = 0; f < k; ++f) {
        double x = 0.0;
        if (!(in >> x) || !std::isfinite(x)) throw Error("model file: bad factor for '" + label + "'");
        factors.push_back(x);
      }
    }
  };

  IdIndex users, items;
  std::vector<double> ub, uf, ib, qf;
  expect_token(in, "users");
  if (!(in >> n)) throw Error("model file: invalid user count");
  read_rows(users, ub, uf, n);
  expect_token(in, "items");
  if (!(in >> m)) throw Error("model file: invalid item count");
  read_rows(items, ib, qf, m);

  LatentModel model(std::move(users), std::move(items), k, mu);
  model.user_bias = Eigen::Map<Eigen::VectorXd>(ub.data(), static_cast<Eigen::Index>(n));
  model.item_bias = Eigen::Map<Eigen::VectorXd>(ib.data(), static_cast<Eigen::Index>(m));
  model.user_factors = Eigen::Map<Eigen::MatrixXd>(uf.data(), static_cast<Eigen::Index>(k),
                                                   static_cast<Eigen::Index>(n));
  model.item_factors = Eigen::Map<Eigen::MatrixXd>(qf.data(), static_cast<Eigen::Index>(k),
                                                   static_cast<Eigen::Index>(m));
  return model;
}

void save_model(const std::filesystem::path& path, const LatentModel& model) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file '" + path.string() + "'");
  save_model(out, model);
}

LatentModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  return read_model(in);
}

void save_variances(std::ostream& out, const LatentModel& model, const UserVariances& variances) {
  if (variances.values.size() != model.user_count()) {
    throw Error("variance count does not match the model's users");
  }
  const auto old_precision = out.precision(17);
  out << kVarianceMagic << ' ' << kFormatVersion << '\n' << "floor " << variances.floor << '\n';
  for (std::size_t u = 0; u < model.user_count(); ++u) {
    out << model.users().label(u) << ' ' << variances.values[u] << '\n';
  }
  out.precision(old_precision);
}

UserVariances read_variances(std::istream& in, const LatentModel& model) {
  expect_token(in, kVarianceMagic);
  int version = 0;
  if (!(in >> version) || version != kFormatVersion) throw Error("unsupported variance file version");
  UserVariances out;
  expect_token(in, "floor");
  if (!(in >> out.floor) || !(out.floor >= 0.0)) throw Error("variance file: invalid floor");
  out.values.assign(model.user_count(), std::numeric_limits<double>::quiet_NaN());
  std::string label;
  double value = 0.0;
  while (in >> label >> value) {
    const auto u = model.users().find(label);
    if (!u) continue;
    if (!(value > 0.0)) throw Error("variance file: non-positive variance for user '" + label + "'");
    out.values[*u] = std::max(value, out.floor);
  }
  for (std::size_t u = 0; u < out.values.size(); ++u) {
    if (std::isnan(out.values[u])) {
      throw Error("variance file has no entry for user '" + model.users().label(u) + "'");
    }
  }
  return out;
}

}  // namespace coldstart
