#include "coldstart/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace coldstart {

double squared_error_sum(std::span<const Prediction> predictions, std::optional<RatingScale> clamp) {
  double sum = 0.0;
  for (const Prediction& p : predictions) {
    const double predicted = clamp ? std::clamp(p.predicted, clamp->min, clamp->max) : p.predicted;
    const double e = predicted - p.actual;
    sum += e * e;
  }
  return sum;
}

double evaluate_rmse(std::span<const Prediction> predictions, std::optional<RatingScale> clamp) {
  if (predictions.empty()) throw Error("RMSE of an empty prediction list");
  return std::sqrt(squared_error_sum(predictions, clamp) / static_cast<double>(predictions.size()));
}

}  // namespace coldstart
