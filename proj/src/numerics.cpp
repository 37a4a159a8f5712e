#include "coldstart/numerics.hpp"

#include <cmath>

namespace coldstart::numerics {

namespace {

void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

SpdMatrix::SpdMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw Error("SPD matrix must be square");
  }
  const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error("SPD matrix is not symmetric");
  }
}

Matrix cholesky_lower(const Matrix& m, double relative_tolerance) {
  const Eigen::Index d = m.rows();
  Matrix l = Matrix::Zero(d, d);
  const double threshold = d > 0 ? relative_tolerance * m.diagonal().cwiseAbs().maxCoeff() : 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    double pivot = m(j, j);
    for (Eigen::Index p = 0; p < j; ++p) pivot -= l(j, p) * l(j, p);
    if (!(pivot > threshold) || !(pivot > 0.0) || !std::isfinite(pivot)) {
      throw NotPositiveDefinite(static_cast<std::size_t>(j));
    }
    const double root = std::sqrt(pivot);
    l(j, j) = root;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      double s = m(i, j);
      for (Eigen::Index p = 0; p < j; ++p) s -= l(i, p) * l(j, p);
      l(i, j) = s / root;
    }
  }
  return l;
}

Vector solve(const SpdMatrix& m, const Vector& rhs, double relative_tolerance) {
  const Matrix l = cholesky_lower(m.entries(), relative_tolerance);
  const Vector y = l.triangularView<Eigen::Lower>().solve(rhs);
  return l.transpose().triangularView<Eigen::Upper>().solve(y);
}

SpdMatrix gram(const Matrix& vectors, std::span<const double> weights, double ridge) {
  if (!(ridge >= 0.0)) throw Error("ridge must be nonnegative");
  const Eigen::Index cols = vectors.cols();
  if (!weights.empty() && static_cast<Eigen::Index>(weights.size()) != cols) {
    throw Error("weights length does not match the number of columns");
  }
  Matrix scaled = vectors;
  if (!weights.empty()) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double w = weights[static_cast<std::size_t>(c)];
      if (!(w >= 0.0)) throw Error("weights must be nonnegative");
      scaled.col(c) *= w;
    }
  }
  Matrix m = scaled * vectors.transpose();
  symmetrize(m);
  m.diagonal().array() += ridge;
  return SpdMatrix(std::move(m));
}

InverseState::InverseState(SpdMatrix m) : matrix_(m.entries()) {
  const Matrix l = cholesky_lower(matrix_);
  const Eigen::Index d = matrix_.rows();
  const Matrix l_inv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
  inverse_ = l_inv.transpose() * l_inv;
  symmetrize(inverse_);
  trace_inv_ = inverse_.trace();
}

void InverseState::downdate(const Vector& v, double w) {
  const Vector u = inverse_ * v;
  const double denom = 1.0 - w * v.dot(u);
  if (denom < kRemovalTolerance) throw RemovalForbidden();
  matrix_.noalias() -= w * v * v.transpose();
  inverse_.noalias() += (w / denom) * u * u.transpose();
  trace_inv_ += w * u.squaredNorm() / denom;
}

InverseState invert(const SpdMatrix& m) { return InverseState(m); }

std::optional<double> downdate_trace_delta_from(const Vector& v, const Vector& inv_v, double w) {
  if (w == 0.0) return 0.0;
  const double denom = 1.0 - w * v.dot(inv_v);
  if (denom < kRemovalTolerance) return std::nullopt;
  return w * inv_v.squaredNorm() / denom;
}

std::optional<double> downdate_trace_delta(const InverseState& state, const Vector& v, double w) {
  const Vector u = state.inverse() * v;
  return downdate_trace_delta_from(v, u, w);
}

InverseState apply_downdate(InverseState state, const Vector& v, double w) {
  state.downdate(v, w);
  return state;
}

Whitening whiten(const Matrix& vectors) {
  const double n = static_cast<double>(vectors.cols());
  Matrix g = vectors * vectors.transpose();
  symmetrize(g);
  Matrix l;
  try {
    l = cholesky_lower(g);
  } catch (const NotPositiveDefinite&) {
    throw Error("cannot whiten: the vectors' second-moment matrix is singular");
  }
  const Eigen::Index d = g.rows();
  const Matrix l_inv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
  Whitening out;
  out.transform = std::sqrt(n) * l_inv.transpose();
  out.whitened = out.transform.transpose() * vectors;
  return out;
}

}  // namespace coldstart::numerics
