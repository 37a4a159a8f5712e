#pragma once

// Deliberately naive reference implementations used as test oracles. Nothing
// here calls into the library's numerics.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coldstart/data.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const Eigen::MatrixXd& m) {
  Dense out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

inline Eigen::MatrixXd from_dense(const Dense& d) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(d.size()),
                      d.empty() ? 0 : static_cast<Eigen::Index>(d[0].size()));
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d[i].size(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d[i][j];
  return out;
}

/// Gauss-Jordan inversion with partial pivoting.
inline Dense gauss_jordan_inverse(Dense a) {
  const std::size_t n = a.size();
  Dense inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0) throw std::runtime_error("oracle: singular matrix");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double p = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= p;
      inv[col][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

inline std::vector<double> gauss_jordan_solve(const Dense& a, const std::vector<double>& b) {
  const Dense inv = gauss_jordan_inverse(a);
  std::vector<double> x(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) x[i] += inv[i][j] * b[j];
  return x;
}

/// sum_c w_c x_c x_c' + ridge I, by explicit loops over the columns of `x`.
inline Dense naive_gram(const Eigen::MatrixXd& x, const std::vector<double>& w, double ridge) {
  const std::size_t d = static_cast<std::size_t>(x.rows());
  Dense g(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double weight = w.empty() ? 1.0 : w[static_cast<std::size_t>(c)];
        s += weight * x(static_cast<Eigen::Index>(i), c) * x(static_cast<Eigen::Index>(j), c);
      }
      g[i][j] = s + (i == j ? ridge : 0.0);
    }
  }
  return g;
}

inline double trace(const Dense& m) {
  double t = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) t += m[i][i];
  return t;
}

/// Columns `cols` of `x`, in the given order.
inline Eigen::MatrixXd columns(const Eigen::MatrixXd& x, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(cols[c]));
  return out;
}

/// Trace((ridge I + sum_{c in cols} w_c x_c x_c')^{-1}) via Gauss-Jordan.
inline double trace_inverse(const Eigen::MatrixXd& x, const std::vector<std::size_t>& cols,
                            const std::vector<double>& weights, double ridge) {
  std::vector<double> w;
  for (std::size_t c : cols) w.push_back(weights.empty() ? 1.0 : weights[c]);
  return trace(gauss_jordan_inverse(naive_gram(columns(x, cols), w, ridge)));
}

/// Pool whose users are 0..n-1 with the given augmented vectors.
inline coldstart::RaterPool make_pool(const Eigen::MatrixXd& vectors,
                                      std::vector<double> variances = {}) {
  coldstart::RaterPool pool;
  pool.item = "new";
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    pool.users.push_back(static_cast<std::size_t>(c));
    pool.labels.push_back("u" + std::to_string(c));
  }
  pool.vectors = vectors;
  pool.variances = std::move(variances);
  return pool;
}

/// Augmented vectors (1, p) with p ~ N(0, scale^2 I_k).
inline Eigen::MatrixXd random_augmented(std::size_t k, std::size_t n, std::mt19937_64& rng,
                                        double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    x(0, c) = 1.0;
    for (Eigen::Index r = 1; r < x.rows(); ++r) x(r, c) = g(rng);
  }
  return x;
}

/// Every size-b subset of {0..n-1} in lexicographic order.
inline std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t b) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (cur.size() == b) {
      out.push_back(cur);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

inline double relative_difference(double a, double b) {
  return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)});
}

}  // namespace oracle
