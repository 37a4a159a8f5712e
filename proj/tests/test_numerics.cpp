#include <random>

#include "coldstart/numerics.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace coldstart;
using namespace coldstart::numerics;

namespace {

Matrix random_pd(std::size_t d, std::mt19937_64& rng) {
  const Matrix x = oracle::random_augmented(d - 1, 3 * d, rng);
  return x * x.transpose() + 0.1 * Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("gram of orthonormal columns is the identity") {
  Matrix x(2, 2);
  x << 1, 0, 0, 1;
  CHECK(max_abs(gram(x).entries() - Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("gram of no columns is the ridge") {
  const SpdMatrix g = gram(Matrix(3, 0), {}, 0.1);
  CHECK(max_abs(g.entries() - 0.1 * Matrix::Identity(3, 3)) < 1e-15);
}

TEST_CASE("gram matches a triple-loop oracle") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Matrix x(5, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  std::vector<double> w = {0.5, 1, 2, 0, 3, 1, 1, 0.25};
  const Matrix expected = oracle::from_dense(oracle::naive_gram(x, w, 0.3));
  CHECK(max_abs(gram(x, w, 0.3).entries() - expected) < 1e-12);
  CHECK(max_abs(gram(x).entries() - oracle::from_dense(oracle::naive_gram(x, {}, 0.0))) < 1e-12);
}

TEST_CASE("gram rejects negative weights and ridge") {
  Matrix x = Matrix::Identity(2, 2);
  std::vector<double> w = {1.0, -1.0};
  CHECK_THROWS_AS(gram(x, w), Error);
  CHECK_THROWS_AS(gram(x, {}, -1.0), Error);
  std::vector<double> short_w = {1.0};
  CHECK_THROWS_AS(gram(x, short_w), Error);
}

TEST_CASE("SpdMatrix rejects asymmetric input") {
  Matrix m(2, 2);
  m << 1, 2, 0, 1;
  CHECK_THROWS_AS(SpdMatrix{m}, Error);
  CHECK_THROWS_AS(SpdMatrix{Matrix(2, 3)}, Error);
}

TEST_CASE("invert identity and diagonal") {
  const InverseState id = invert(SpdMatrix(Matrix::Identity(3, 3)));
  CHECK(max_abs(id.inverse() - Matrix::Identity(3, 3)) < 1e-15);
  CHECK(id.trace_inv() == doctest::Approx(3.0));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 4;
  const InverseState s = invert(SpdMatrix(d));
  CHECK(s.inverse()(0, 0) == doctest::Approx(0.5));
  CHECK(s.inverse()(1, 1) == doctest::Approx(0.25));
  CHECK(s.trace_inv() == doctest::Approx(0.75));
}

TEST_CASE("invert matches Gauss-Jordan and satisfies the state invariants") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = random_pd(4, rng);
    const InverseState s = invert(SpdMatrix(m));
    const Matrix gj = oracle::from_dense(oracle::gauss_jordan_inverse(oracle::to_dense(m)));
    CHECK(max_abs(s.inverse() - gj) < 1e-9);
    CHECK(max_abs(m * s.inverse() - Matrix::Identity(4, 4)) < 1e-8);
    CHECK(oracle::relative_difference(s.trace_inv(), s.inverse().trace()) < 1e-10);
  }
}

TEST_CASE("invert reports the failing pivot") {
  Matrix m = Matrix::Identity(3, 3);
  m(2, 2) = -1.0;
  try {
    invert(SpdMatrix(m));
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot() == 2);
  }
}

TEST_CASE("downdate trace delta on a diagonal matrix") {
  const InverseState s = invert(SpdMatrix(2.0 * Matrix::Identity(2, 2)));
  Vector e1 = Vector::Zero(2);
  e1(0) = 1.0;
  // (2I - e1 e1')^{-1} = diag(1, 1/2): trace 1.5 against 1.
  CHECK(*downdate_trace_delta(s, e1, 1.0) == doctest::Approx(0.5));
  CHECK(*downdate_trace_delta(s, e1, 0.0) == 0.0);
  CHECK_FALSE(downdate_trace_delta(s, e1, 2.0).has_value());
  CHECK_THROWS_AS(apply_downdate(s, e1, 2.0), RemovalForbidden);
}

TEST_CASE("downdate delta matches a full recompute") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_augmented(3, 9, rng);
    const InverseState s = invert(gram(x, {}, 1e-3));
    std::vector<std::size_t> rest = {1, 2, 3, 4, 5, 6, 7, 8};
    const double expected = oracle::trace_inverse(x, rest, {}, 1e-3) - s.trace_inv();
    const auto delta = downdate_trace_delta(s, x.col(0), 1.0);
    REQUIRE(delta.has_value());
    CHECK(*delta >= 0.0);
    CHECK(oracle::relative_difference(*delta, expected) < 1e-8);
  }
}

TEST_CASE("downdating the only column returns the ridge state") {
  Vector v(3);
  v << 1.0, 0.5, -2.0;
  Matrix x = v;
  const InverseState s = apply_downdate(invert(gram(x, {}, 0.2)), v, 1.0);
  CHECK(max_abs(s.inverse() - 5.0 * Matrix::Identity(3, 3)) < 1e-9);
  CHECK(s.trace_inv() == doctest::Approx(15.0));
}

TEST_CASE("successive downdates equal a rebuild, and re-adding round-trips") {
  std::mt19937_64 rng(8);
  const Matrix x = oracle::random_augmented(4, 12, rng);
  const InverseState full = invert(gram(x, {}, 1e-2));
  InverseState s = apply_downdate(full, x.col(3), 1.0);
  s = apply_downdate(s, x.col(7), 1.0);
  std::vector<std::size_t> rest = {0, 1, 2, 4, 5, 6, 8, 9, 10, 11};
  const InverseState rebuilt = invert(gram(oracle::columns(x, rest), {}, 1e-2));
  CHECK(max_abs(s.inverse() - rebuilt.inverse()) < 1e-8);
  CHECK(oracle::relative_difference(s.trace_inv(), rebuilt.trace_inv()) < 1e-8);
  s = apply_downdate(s, x.col(7), -1.0);
  s = apply_downdate(s, x.col(3), -1.0);
  CHECK(max_abs(s.inverse() - full.inverse()) < 1e-7);
}

TEST_CASE("whitening: closed-form 2x2 case") {
  Matrix x(2, 2);
  x << 1, 0, 0, 2;
  const Whitening w = whiten(x);
  CHECK(max_abs(w.whitened * w.whitened.transpose() - 2.0 * Matrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("whitening an isotropic population is orthogonal") {
  Matrix x(2, 4);
  x << 1, -1, 1, -1, 1, 1, -1, -1;
  const Whitening w = whiten(x);
  CHECK(max_abs(w.transform.transpose() * w.transform - Matrix::Identity(2, 2)) < 1e-12);
  CHECK(max_abs(w.whitened * w.whitened.transpose() - 4.0 * Matrix::Identity(2, 2)) < 1e-10);
}

TEST_CASE("whitening preserves user-item inner products") {
  std::mt19937_64 rng(21);
  const Matrix users = oracle::random_augmented(3, 50, rng, 0.7);
  const Matrix items = oracle::random_augmented(3, 50, rng, 0.7);
  const Whitening w = whiten(users);
  CHECK(max_abs(w.whitened * w.whitened.transpose() - 50.0 * Matrix::Identity(4, 4)) < 1e-6);
  const Matrix moved = w.transform.inverse() * items;
  for (Eigen::Index c = 0; c < 50; ++c) {
    CHECK(std::abs(w.whitened.col(c).dot(moved.col(c)) - users.col(c).dot(items.col(c))) < 1e-8);
  }
}

TEST_CASE("whitening a singular population fails") {
  Matrix x(2, 3);
  x << 1, 2, 3, 2, 4, 6;
  CHECK_THROWS_AS(whiten(x), Error);
}

TEST_CASE("objective is antitone under added rank-one terms and obeys the AM-HM bound") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix m = random_pd(5, rng);
    const Matrix x = oracle::random_augmented(4, 1, rng);
    const double before = invert(SpdMatrix(m)).trace_inv();
    const double after = invert(SpdMatrix(m + x * x.transpose())).trace_inv();
    CHECK(after <= before + 1e-12);
    CHECK(before >= 25.0 / m.trace() - 1e-12);
  }
}

TEST_CASE("500 successive downdates with periodic refresh stay within 1e-8 of recompute") {
  std::mt19937_64 rng(41);
  const Matrix x = oracle::random_augmented(10, 600, rng);
  const double ridge = 1e-6 * 11;
  InverseState s = invert(gram(x, {}, ridge));
  std::vector<std::size_t> alive(600);
  for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = i;
  double worst = 0.0;
  for (int step = 1; step <= 500; ++step) {
    const std::size_t victim = alive.back();
    alive.pop_back();
    s.downdate(x.col(static_cast<Eigen::Index>(victim)), 1.0);
    if (step % 128 == 0) s = invert(gram(oracle::columns(x, alive), {}, ridge));
    const double fresh = invert(gram(oracle::columns(x, alive), {}, ridge)).trace_inv();
    worst = std::max(worst, oracle::relative_difference(s.trace_inv(), fresh));
  }
  CHECK(worst < 1e-8);
}
