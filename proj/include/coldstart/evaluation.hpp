#pragma once

#include <optional>
#include <span>

#include "coldstart/data.hpp"

namespace coldstart {

struct Prediction {
  double predicted = 0.0;
  double actual = 0.0;
};

/// Root mean squared error. When `clamp` is given, predictions are first
/// clamped to its range. Throws Error on an empty list.
double evaluate_rmse(std::span<const Prediction> predictions,
                     std::optional<RatingScale> clamp = std::nullopt);

/// Sum of squared errors, same clamping rule; zero for an empty list.
double squared_error_sum(std::span<const Prediction> predictions,
                         std::optional<RatingScale> clamp = std::nullopt);

}  // namespace coldstart
