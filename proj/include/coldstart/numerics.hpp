#pragma once

// Small dense SPD linear algebra for the design objectives: Gram matrices,
// Cholesky inversion, and Sherman-Morrison maintenance of the inverse under
// rank-one removals/additions.

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "coldstart/errors.hpp"

namespace coldstart::numerics {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Denominators 1 - w v'M^{-1}v below this forbid the removal.
inline constexpr double kRemovalTolerance = 1e-10;

/// Symmetric positive-definite matrix of order d = k + 1.
class SpdMatrix {
 public:
  SpdMatrix() = default;
  /// Throws Error when `entries` is not square or not symmetric to 1e-12 relative.
  explicit SpdMatrix(Matrix entries);

  const Matrix& entries() const noexcept { return entries_; }
  std::size_t order() const noexcept { return static_cast<std::size_t>(entries_.rows()); }

 private:
  Matrix entries_;
};

/// Raised by apply_downdate when the rank-one removal would make the matrix singular.
class RemovalForbidden : public Error {
 public:
  RemovalForbidden() : Error("rank-one removal would make the design singular") {}
};

/// Lower Cholesky factor of `m`; throws NotPositiveDefinite naming the 0-based
/// pivot. A pivot at or below `relative_tolerance` times the largest diagonal
/// entry counts as a failure.
Matrix cholesky_lower(const Matrix& m, double relative_tolerance = 0.0);

/// Solves m x = rhs by Cholesky.
Vector solve(const SpdMatrix& m, const Vector& rhs, double relative_tolerance = 0.0);

/// sum_v w_v * x_v x_v' + ridge * I over the columns x_v of `vectors`.
/// Empty `weights` means unit weights.
SpdMatrix gram(const Matrix& vectors, std::span<const double> weights = {}, double ridge = 0.0);

/// SPD matrix together with its inverse and the trace of the inverse.
class InverseState {
 public:
  InverseState() = default;
  explicit InverseState(SpdMatrix m);

  const Matrix& matrix() const noexcept { return matrix_; }
  const Matrix& inverse() const noexcept { return inverse_; }
  double trace_inv() const noexcept { return trace_inv_; }
  std::size_t order() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

  /// In-place M <- M - w v v'. Negative w adds the term. Throws RemovalForbidden.
  void downdate(const Vector& v, double w);

 private:
  Matrix matrix_;
  Matrix inverse_;
  double trace_inv_ = 0.0;
};

/// Cholesky-based inversion; throws NotPositiveDefinite.
InverseState invert(const SpdMatrix& m);

/// Trace((M - w v v')^{-1}) - Trace(M^{-1}), or nullopt when the removal is forbidden.
std::optional<double> downdate_trace_delta(const InverseState& state, const Vector& v, double w);

/// Same quantity from the precomputed u = M^{-1} v.
std::optional<double> downdate_trace_delta_from(const Vector& v, const Vector& inv_v, double w);

InverseState apply_downdate(InverseState state, const Vector& v, double w);

struct Whitening {
  Matrix transform;  ///< F with F' X X' F = n I
  Matrix whitened;   ///< F' X
};

/// Maps the columns of `vectors` into isotropic position. Items transformed by
/// F^{-1} keep their inner products with the whitened users.
Whitening whiten(const Matrix& vectors);

}  // namespace coldstart::numerics
