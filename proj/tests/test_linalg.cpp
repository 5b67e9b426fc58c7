#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "switchstab/linalg.hpp"
#include "switchstab/polynomial.hpp"
#include "switchstab/quadrature.hpp"
#include "switchstab/rng.hpp"

using namespace switchstab;

TEST(Linalg, JacobiEigenvaluesOfKnownMatrix) {
  // eigenvalues of [[2,1],[1,2]] are 1 and 3
  const Vector eig = symmetric_eigenvalues(Matrix{{2, 1}, {1, 2}});
  ASSERT_EQ(eig.size(), 2u);
  EXPECT_NEAR(eig[0], 1.0, 1e-14);
  EXPECT_NEAR(eig[1], 3.0, 1e-14);
}

TEST(Linalg, JacobiMatchesTraceAndDeterminant) {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = 2.0 * rng.uniform01() - 1.0;
    const Vector eig = symmetric_eigenvalues(a);
    double trace = 0.0, sum = 0.0, frob = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < 4; ++i) trace += a(i, i);
    for (double v : a.data()) frob += v * v;
    for (double e : eig) {
      sum += e;
      sq += e * e;
    }
    EXPECT_NEAR(sum, trace, 1e-12);
    EXPECT_NEAR(sq, frob, 1e-12);
    EXPECT_TRUE(std::is_sorted(eig.begin(), eig.end()));
  }
}

TEST(Linalg, CholeskyReconstructs) {
  const Matrix p{{4, 2, 0.4}, {2, 5, 1}, {0.4, 1, 3}};
  const Matrix l = cholesky(p);
  const Matrix back = l * l.transposed();
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(back(i, j), p(i, j), 1e-14);
}

TEST(Linalg, CholeskyRejectsIndefinite) {
  EXPECT_THROW(cholesky(Matrix{{1, 2}, {2, 1}}), std::domain_error);
}

TEST(Linalg, CongruenceOfIdentityIsInverse) {
  const Matrix p{{2, 0}, {0, 8}};
  const Matrix c = congruence_by_inverse(cholesky(p), Matrix::identity(2));
  EXPECT_NEAR(c(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(c(1, 1), 0.125, 1e-15);
  EXPECT_NEAR(c(0, 1), 0.0, 1e-15);
}

TEST(Linalg, MultiplyChecksDimensions) {
  const Matrix a{{1, 2}, {3, 4}};
  EXPECT_THROW(multiply(a, Vector{1, 2, 3}), std::invalid_argument);
  const Vector y = multiply(a, Vector{1, 1});
  EXPECT_DOUBLE_EQ(y[0], 3);
  EXPECT_DOUBLE_EQ(y[1], 7);
}

TEST(Polynomial, EvaluateAndGradient) {
  // p(x, y) = 3x²y − y³
  const Polynomial p(2, {{{2, 1}, 3.0}, {{0, 3}, -1.0}});
  const Vector x{1.5, -0.5};
  EXPECT_NEAR(p.evaluate(x), 3 * 2.25 * -0.5 + 0.125, 1e-15);
  Vector g(2, 0.0);
  p.accumulate_gradient(x, g);
  EXPECT_NEAR(g[0], 6 * 1.5 * -0.5, 1e-15);
  EXPECT_NEAR(g[1], 3 * 2.25 - 3 * 0.25, 1e-15);
  EXPECT_EQ(p.degree(), 3u);
  EXPECT_FALSE(p.has_constant_term());
  EXPECT_TRUE(Polynomial(1, {{{0}, 2.0}}).has_constant_term());
}

TEST(Polynomial, RejectsWrongExponentLength) {
  EXPECT_THROW(Polynomial(2, {{{1}, 1.0}}), std::invalid_argument);
}

TEST(Quadrature, PolynomialIsExact) {
  const auto r = integrate_adaptive([](double x) { return x * x * x - 2 * x; }, 0.0, 2.0);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 0.0, 1e-14);
}

TEST(Quadrature, OscillatoryIntegrand) {
  const auto r = integrate_adaptive([](double x) { return std::sin(20 * x); }, 0.0, 3.0, 1e-12);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, (1.0 - std::cos(60.0)) / 20.0, 1e-12);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a(derive_seed(7, 0)), b(derive_seed(7, 0)), c(derive_seed(7, 1));
  for (int k = 0; k < 100; ++k) {
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
  }
}

TEST(Rng, UniformRangesAndMean) {
  Rng rng(1);
  double sum = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform01();
    const double v = rng.uniform_open_closed();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5 * std::sqrt(1.0 / 12.0 / n));
}
