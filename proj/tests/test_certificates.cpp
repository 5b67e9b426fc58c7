#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "switchstab/certificates.hpp"

using namespace switchstab;

namespace {

SubsystemFamily scalar_family(std::initializer_list<double> rates) {
  std::vector<VectorField> fields;
  for (double a : rates) fields.push_back(VectorField::linear(Matrix{{a}}));
  return SubsystemFamily(std::move(fields));
}

}  // namespace

TEST(LyapunovSpec, QuadraticValidation) {
  EXPECT_THROW(LyapunovSpec::quadratic(Matrix{{1, 0.5}, {0.4, 1}}), std::invalid_argument);
  EXPECT_THROW(LyapunovSpec::quadratic(Matrix{{1, 2}, {2, 1}}), std::invalid_argument);
  EXPECT_THROW(LyapunovSpec::quadratic(Matrix(2, 3)), std::invalid_argument);
  EXPECT_NO_THROW(LyapunovSpec::quadratic(Matrix{{2, 0.5}, {0.5, 1}}));
}

TEST(LyapunovSpec, PolynomialValidation) {
  EXPECT_THROW(LyapunovSpec::polynomial(Polynomial(1, {{{0}, 1.0}, {{2}, 1.0}})), std::invalid_argument);
  EXPECT_THROW(LyapunovSpec::polynomial(Polynomial(2, {{{2, 0}, 1.0}})), std::invalid_argument);
  EXPECT_NO_THROW(LyapunovSpec::polynomial(Polynomial(2, {{{2, 0}, 1.0}, {{0, 4}, 1.0}})));
}

TEST(LyapunovSpec, GradientMatchesFiniteDifference) {
  const LyapunovSpec q = LyapunovSpec::quadratic(Matrix{{2, 0.5}, {0.5, 1}});
  const LyapunovSpec p = LyapunovSpec::polynomial(Polynomial(2, {{{2, 0}, 1.0}, {{1, 1}, 0.3}, {{0, 4}, 0.5}}));
  const Vector x{0.7, -1.3};
  for (const auto* v : {&q, &p}) {
    Vector g(2);
    v->gradient(x, g);
    for (std::size_t i = 0; i < 2; ++i) {
      Vector xp = x, xm = x;
      xp[i] += 1e-6;
      xm[i] -= 1e-6;
      EXPECT_NEAR(g[i], (v->value(xp) - v->value(xm)) / 2e-6, 1e-7);
    }
  }
}

TEST(LyapunovSpec, ValueAndLieDerivative) {
  const LyapunovSpec v = LyapunovSpec::quadratic(Matrix{{1}});
  EXPECT_DOUBLE_EQ(lyapunov_value(v, Vector{3.0}), 9.0);
  EXPECT_DOUBLE_EQ(lie_derivative(v, VectorField::linear(Matrix{{-1}}), Vector{3.0}), -18.0);
  EXPECT_THROW(lyapunov_value(v, Vector{1.0, 2.0}), std::domain_error);
  EXPECT_THROW(lie_derivative(v, VectorField::linear(Matrix::identity(2)), Vector{1.0}), std::domain_error);
}

TEST(ExtractLambda, ReferenceCases) {
  const Matrix i2 = Matrix::identity(2);
  EXPECT_NEAR(extract_lambda_quadratic(i2, -1.0 * i2), 2.0, 1e-10);
  EXPECT_NEAR(extract_lambda_quadratic(i2, i2), -2.0, 1e-10);
  EXPECT_NEAR(extract_lambda_quadratic(i2, Matrix{{0, 1}, {-1, 0}}), 0.0, 1e-10);
}

TEST(ExtractLambda, IsTightForTheDecayInequality) {
  const Matrix p{{2, 0.3}, {0.3, 1}};
  const Matrix a{{-1, 2}, {0, -3}};
  const double lam = extract_lambda_quadratic(p, a);
  // AᵀP + PA + λP is negative semidefinite with a zero eigenvalue.
  const Matrix m = a.transposed() * p + p * a + lam * p;
  const Vector eig = symmetric_eigenvalues(symmetrized(m));
  EXPECT_NEAR(eig.back(), 0.0, 1e-10);
  EXPECT_LT(eig.front(), 0.0);
}

TEST(ExtractLambda, Errors) {
  EXPECT_THROW(extract_lambda_quadratic(Matrix::identity(2), Matrix::identity(3)), std::domain_error);
  EXPECT_THROW(extract_lambda_quadratic(Matrix{{1, 0.2}, {0, 1}}, Matrix::identity(2)), std::domain_error);
  EXPECT_THROW(extract_lambda_quadratic(Matrix{{-1}}, Matrix{{1}}), std::domain_error);
}

TEST(ExtractMu, ReferenceAndFloor) {
  const std::vector<LyapunovSpec> a{LyapunovSpec::quadratic(Matrix::identity(2)),
                                    LyapunovSpec::quadratic(2.0 * Matrix::identity(2))};
  EXPECT_NEAR(extract_mu(a), 2.0, 1e-12);
  const std::vector<LyapunovSpec> same{LyapunovSpec::quadratic(Matrix::identity(2)),
                                       LyapunovSpec::quadratic(Matrix::identity(2))};
  EXPECT_DOUBLE_EQ(extract_mu(same), 1.0);
  EXPECT_DOUBLE_EQ(strict_mu(1.0), 1.0 + 1e-9);
  EXPECT_DOUBLE_EQ(strict_mu(1.5), 1.5);
}

TEST(ExtractConstants, InvariantUnderCommonScaling) {
  const Matrix p1{{2, 0.3}, {0.3, 1}}, p2{{1, -0.2}, {-0.2, 3}};
  const SubsystemFamily fam({VectorField::linear(Matrix{{-1, 2}, {0, -3}}),
                             VectorField::linear(Matrix{{0.5, 1}, {-1, -0.2}})});
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    const std::vector<LyapunovSpec> base{LyapunovSpec::quadratic(p1), LyapunovSpec::quadratic(p2)};
    const std::vector<LyapunovSpec> scaled{LyapunovSpec::quadratic(c * p1), LyapunovSpec::quadratic(c * p2)};
    const Matrix l0 = extract_lambda_matrix(base, fam);
    const Matrix l1 = extract_lambda_matrix(scaled, fam);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(l0(i, j), l1(i, j), 1e-10) << "c = " << c;
    EXPECT_NEAR(extract_mu(base), extract_mu(scaled), 1e-10);
  }
}

TEST(CertifyLinear, WorkedScalarFamily) {
  const SubsystemFamily fam = scalar_family({-1.0, 1.0});
  const CertificateFamily cert = certify_linear(
      {LyapunovSpec::quadratic(Matrix{{1}}), LyapunovSpec::quadratic(Matrix{{1}})}, fam, 1.01);
  ASSERT_TRUE(cert.lambda.has_value());
  EXPECT_NEAR((*cert.lambda)[0], 2.0, 1e-12);
  EXPECT_NEAR((*cert.lambda)[1], -2.0, 1e-12);
  EXPECT_NEAR((*cert.lambda_matrix)(0, 1), -2.0, 1e-12);
  EXPECT_NEAR((*cert.lambda_matrix)(1, 0), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(cert.mu, 1.01);
  EXPECT_DOUBLE_EQ(cert.alpha1(2.0), 4.0);
  EXPECT_DOUBLE_EQ(cert.alpha2(2.0), 4.0);
  EXPECT_TRUE(verify_pointwise(fam, cert, default_samples(1)).empty());
}

TEST(CertifyLinear, StrictMuWhenNotOverridden) {
  const SubsystemFamily fam = scalar_family({-1.0, -2.0});
  const CertificateFamily cert = certify_linear(
      {LyapunovSpec::quadratic(Matrix{{1}}), LyapunovSpec::quadratic(Matrix{{3}})}, fam);
  EXPECT_NEAR(cert.mu, 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(cert.alpha1.coeff, 1.0);
  EXPECT_DOUBLE_EQ(cert.alpha2.coeff, 3.0);
  EXPECT_TRUE(verify_pointwise(fam, cert, default_samples(1)).empty());
}

TEST(VerifyPointwise, ReportsEachInequality) {
  const SubsystemFamily fam = scalar_family({-1.0, 1.0});
  CertificateFamily cert;
  cert.V = {LyapunovSpec::quadratic(Matrix{{1}}), LyapunovSpec::quadratic(Matrix{{2}})};
  cert.lambda = Vector{2.5, -2.0};  // mode 1 claims too fast a decay
  cert.mu = 1.5;                    // V_2 ≤ 1.5 V_1 fails
  cert.alpha1 = {1.0, 2.0};
  cert.alpha2 = {1.5, 2.0};         // V_2 ≤ α_2 fails
  const auto v = verify_pointwise(fam, cert, std::vector<Vector>{{1.0}});
  auto has = [&](const std::string& id, Mode i) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.inequality == id && x.mode_i == i; });
  };
  EXPECT_TRUE(has("V2", 0));
  EXPECT_FALSE(has("V2", 1));
  EXPECT_TRUE(has("V3", 1));
  EXPECT_FALSE(has("V3", 0));
  EXPECT_TRUE(has("V1", 1));
}

TEST(VerifyPointwise, OriginNeverViolates) {
  const SubsystemFamily fam = scalar_family({5.0});
  CertificateFamily cert;
  cert.V = {LyapunovSpec::quadratic(Matrix{{1}})};
  cert.lambda = Vector{100.0};
  cert.alpha1 = {1.0, 2.0};
  cert.alpha2 = {1.0, 2.0};
  EXPECT_TRUE(verify_pointwise(fam, cert, std::vector<Vector>{{0.0}}).empty());
  EXPECT_FALSE(verify_pointwise(fam, cert, std::vector<Vector>{{0.1}}).empty());
}

TEST(CertificateFamily, Validate) {
  CertificateFamily cert;
  cert.V = {LyapunovSpec::quadratic(Matrix{{1}})};
  cert.lambda = Vector{1.0};
  cert.mu = 1.0;
  EXPECT_THROW(cert.validate(1, 1), std::invalid_argument);
  cert.mu = 1.1;
  EXPECT_NO_THROW(cert.validate(1, 1));
  EXPECT_THROW(cert.validate(2, 1), std::invalid_argument);
  EXPECT_THROW(cert.validate(1, 2), std::invalid_argument);
}

TEST(Samples, DefaultSampleSetShape) {
  const auto s = default_samples(3);
  ASSERT_EQ(s.size(), 1001u);
  EXPECT_EQ(norm2(s.back()), 0.0);
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    const double r = norm2(s[k]);
    EXPECT_GE(r, 1e-2 * (1 - 1e-12));
    EXPECT_LE(r, 1e2 * (1 + 1e-12));
  }
  for (const auto& d : unit_directions(4, 50, 3)) EXPECT_NEAR(norm2(d), 1.0, 1e-14);
}
