#pragma once

// Biased latent factor model r_ui ~ mu + b_i + b_u + Q_i'P_u, trained with
// AdaGrad-scaled SGD, plus per-user residual variance estimates.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "coldstart/data.hpp"

namespace coldstart {

class LatentModel {
 public:
  LatentModel() = default;
  /// Zero biases and factors of dimension k for the given users and items.
  LatentModel(IdIndex users, IdIndex items, std::size_t k, double mu);

  std::size_t k() const noexcept { return static_cast<std::size_t>(user_factors.rows()); }
  std::size_t user_count() const noexcept { return users_.size(); }
  std::size_t item_count() const noexcept { return items_.size(); }
  const IdIndex& users() const noexcept { return users_; }
  const IdIndex& items() const noexcept { return items_; }

  double mu = 0.0;
  Eigen::VectorXd user_bias;
  Eigen::VectorXd item_bias;
  Eigen::MatrixXd user_factors;  ///< k x n
  Eigen::MatrixXd item_factors;  ///< k x m

 private:
  IdIndex users_;
  IdIndex items_;
};

struct TrainConfig {
  std::size_t k = 20;
  std::size_t epochs = 30;
  double base_learning_rate = 0.05;
  double l2_penalty = 0.02;
  std::uint64_t seed = 1;
  double accumulator_epsilon = 1e-8;
};

struct UserVariances {
  std::vector<double> values;  ///< indexed by model user
  double floor = 1e-4;
};

/// Trains on every rating of `train`. Deterministic given the config.
/// `epoch_rmse`, when given, receives the training RMSE after each epoch.
/// Throws Error on an empty dataset or a non-finite loss.
LatentModel train_lfm(const RatingDataset& train, const TrainConfig& config,
                      std::vector<double>* epoch_rmse = nullptr);

/// mu + b_i + b_u + Q_i'P_u, unclamped. Throws Error on unknown indices.
double predict(const LatentModel& model, std::size_t user, std::size_t item);

/// (1, P_u).
Eigen::VectorXd augment(const LatentModel& model, std::size_t user);

/// (k+1) x n matrix whose column u is augment(model, u).
Eigen::MatrixXd augmented_users(const LatentModel& model);

/// Mean squared residual over each user's ratings in `train`; users with
/// fewer than `min_ratings` ratings get the global mean squared residual.
/// Every value is then raised to at least `floor`.
UserVariances estimate_user_variances(const LatentModel& model, const RatingDataset& train,
                                      double floor = 1e-4, std::size_t min_ratings = 20);

/// Text model format; see docs/formats.md.
void save_model(std::ostream& out, const LatentModel& model);
LatentModel read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const LatentModel& model);
LatentModel load_model(const std::filesystem::path& path);

void save_variances(std::ostream& out, const LatentModel& model, const UserVariances& variances);
UserVariances read_variances(std::istream& in, const LatentModel& model);

}  // namespace coldstart
