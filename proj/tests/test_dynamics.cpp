#include <gtest/gtest.h>

#include <cmath>

#include "switchstab/dynamics.hpp"

using namespace switchstab;

namespace {

SubsystemFamily scalar_family(std::initializer_list<double> rates) {
  std::vector<VectorField> fields;
  for (double a : rates) fields.push_back(VectorField::linear(Matrix{{a}}));
  return SubsystemFamily(std::move(fields));
}

// x(t) for ẋ = a_σ x along a fixed path.
double piecewise_exponential(const SwitchingPath& p, std::span<const double> rates, double x0, double t) {
  double log_growth = 0.0;
  for (std::size_t k = 0; k < p.times.size(); ++k) {
    const double end = k + 1 < p.times.size() ? std::min(p.times[k + 1], t) : t;
    if (end <= p.times[k]) break;
    log_growth += rates[p.modes[k]] * (end - p.times[k]);
  }
  return x0 * std::exp(log_growth);
}

class ConstantLaw : public FeedbackLaw {
 public:
  explicit ConstantLaw(double gain) : gain_(gain) {}
  std::size_t inputs() const override { return 1; }
  void control(Mode, std::span<const double> x, std::span<double> u) const override { u[0] = gain_; }

 private:
  double gain_;
};

}  // namespace

TEST(VectorField, ValidatesConstruction) {
  EXPECT_THROW(VectorField::linear(Matrix(2, 3)), std::invalid_argument);
  EXPECT_THROW(VectorField::polynomial({Polynomial(1, {{{0}, 1.0}})}), std::invalid_argument);
  EXPECT_THROW(VectorField::polynomial({Polynomial(2, {{{1, 0}, 1.0}})}), std::invalid_argument);
  EXPECT_THROW(SubsystemFamily({}), std::invalid_argument);
  EXPECT_THROW(SubsystemFamily({VectorField::linear(Matrix{{1}}), VectorField::linear(Matrix::identity(2))}),
               std::invalid_argument);
}

TEST(VectorField, CheckedEvaluation) {
  const VectorField f = VectorField::linear(Matrix{{0, 1}, {-2, -3}});
  const Vector y = f(Vector{1.0, 2.0});
  EXPECT_DOUBLE_EQ(y[0], 2.0);
  EXPECT_DOUBLE_EQ(y[1], -8.0);
  EXPECT_THROW(f(Vector{1.0}), std::domain_error);
  EXPECT_TRUE(f.is_linear());
}

TEST(Integrate, SingleModeExponential) {
  const SubsystemFamily fam = scalar_family({-1.0});
  const SwitchingPath path{{0.0}, {0}, 5.0};
  const Trajectory tr = integrate(fam, path, Vector{1.0}, 1e-3);
  ASSERT_FALSE(tr.divergent);
  EXPECT_NEAR(tr.times.back(), 5.0, 0.0);
  EXPECT_NEAR(tr.state(tr.size() - 1)[0], std::exp(-5.0), 1e-12);
  EXPECT_EQ(tr.size(), 5001u);
}

TEST(Integrate, PiecewiseClosedFormAlongFixedPath) {
  const std::vector<double> rates{-7.0, 6.5, -9.0};
  const SubsystemFamily fam = scalar_family({-7.0, 6.5, -9.0});
  const SwitchingPath path{{0.0, 0.3, 0.55, 0.9, 1.2, 1.7}, {0, 1, 2, 1, 0, 2}, 2.0};
  const Trajectory tr = integrate(fam, path, Vector{1.0}, 1e-3);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double exact = piecewise_exponential(path, rates, 1.0, tr.times[k]);
    ASSERT_NEAR(tr.state(k)[0], exact, 1e-8 * std::abs(exact)) << "t = " << tr.times[k];
  }
}

TEST(Integrate, FourthOrderConvergence) {
  const std::vector<double> rates{-7.0, 6.5, -9.0};
  const SubsystemFamily fam = scalar_family({-7.0, 6.5, -9.0});
  const SwitchingPath path{{0.0, 0.3, 0.55, 0.9, 1.2, 1.7}, {0, 1, 2, 1, 0, 2}, 2.0};
  const double exact = piecewise_exponential(path, rates, 1.0, 2.0);
  auto err = [&](double h) {
    const Trajectory tr = integrate(fam, path, Vector{1.0}, h);
    return std::abs(tr.state(tr.size() - 1)[0] - exact);
  };
  const double ratio = err(2e-3) / err(1e-3);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(Integrate, LandsExactlyOnSwitchTimesAndBreakpoints) {
  const SubsystemFamily fam = scalar_family({-1.0, -2.0});
  const SwitchingPath path{{0.0, 0.3337}, {0, 1}, 1.0};
  IntegrationOptions opt;
  opt.step = 0.01;
  opt.breakpoints = {0.5, 0.77777};
  std::vector<GridPoint> seen;
  std::vector<double> xs;
  integrate_observed(fam, path, Vector{1.0}, opt, [&](const GridPoint& p) {
    seen.push_back(p);
    xs.push_back(p.x[0]);
  });
  auto find = [&](double t) {
    for (const auto& p : seen)
      if (p.t == t) return &p;
    return static_cast<const GridPoint*>(nullptr);
  };
  ASSERT_NE(find(0.3337), nullptr);
  EXPECT_TRUE(find(0.3337)->at_switch);
  EXPECT_EQ(find(0.3337)->mode, 1u);
  EXPECT_EQ(find(0.3337)->jump_index, 1u);
  ASSERT_NE(find(0.77777), nullptr);
  EXPECT_TRUE(find(0.77777)->at_breakpoint);
  EXPECT_FALSE(find(0.77777)->at_switch);
  EXPECT_EQ(seen.front().t, 0.0);
  EXPECT_TRUE(seen.front().at_switch);
  EXPECT_EQ(seen.back().t, 1.0);
  for (std::size_t k = 1; k < seen.size(); ++k) EXPECT_GT(seen[k].t, seen[k - 1].t);
  // Continuity across the switch: one value per time instant.
  EXPECT_NEAR(xs.back(), std::exp(-0.3337 - 2.0 * (1.0 - 0.3337)), 1e-9);
}

TEST(Integrate, ZeroStateStaysZero) {
  const SubsystemFamily fam = scalar_family({3.0, -1.0});
  const SwitchingPath path{{0.0, 1.0}, {0, 1}, 2.0};
  const Trajectory tr = integrate(fam, path, Vector{0.0}, 1e-2);
  for (std::size_t k = 0; k < tr.size(); ++k) EXPECT_EQ(tr.state(k)[0], 0.0);
}

TEST(Integrate, DivergenceIsFlaggedNotThrown) {
  const SubsystemFamily fam = scalar_family({50.0});
  const SwitchingPath path{{0.0}, {0}, 2.0};
  const Trajectory tr = integrate(fam, path, Vector{1.0}, 1e-3);
  EXPECT_TRUE(tr.divergent);
  // e^{50 t} crosses 1e12 near t = 0.5526.
  EXPECT_NEAR(tr.divergence_time, std::log(1e12) / 50.0, 2e-3);
  for (std::size_t k = 0; k < tr.size(); ++k) EXPECT_LE(std::abs(tr.state(k)[0]), 1e12);
}

TEST(Integrate, PolynomialFieldClosedForm) {
  // ẋ = −x³ has x(t) = x0 / √(1 + 2 x0² t).
  const SubsystemFamily fam({VectorField::polynomial({Polynomial(1, {{{3}, -1.0}})})});
  const SwitchingPath path{{0.0}, {0}, 3.0};
  const Trajectory tr = integrate(fam, path, Vector{2.0}, 1e-3);
  EXPECT_NEAR(tr.state(tr.size() - 1)[0], 2.0 / std::sqrt(1.0 + 8.0 * 3.0), 1e-10);
}

TEST(Integrate, ControllerClosesTheLoop) {
  // ẋ = x + x·u with u = −3 gives ẋ = −2x.
  const SubsystemFamily fam({VectorField::linear(Matrix{{1.0}})}, {{VectorField::linear(Matrix{{1.0}})}});
  const SwitchingPath path{{0.0}, {0}, 1.0};
  const auto law = std::make_shared<ConstantLaw>(-3.0);
  const Trajectory tr = integrate(fam, path, Vector{1.0}, 1e-3, law);
  EXPECT_NEAR(tr.state(tr.size() - 1)[0], std::exp(-2.0), 1e-12);
  const VectorField cl = closed_loop(fam.drift(0), fam.control(0), law, 0);
  EXPECT_NEAR(cl(Vector{0.5})[0], -1.0, 1e-15);
}

TEST(Integrate, RejectsBadInputs) {
  const SubsystemFamily fam = scalar_family({-1.0});
  const SwitchingPath path{{0.0}, {0}, 1.0};
  EXPECT_THROW(integrate(fam, path, Vector{1.0, 2.0}, 1e-3), std::invalid_argument);
  EXPECT_THROW(integrate(fam, path, Vector{1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(integrate(fam, SwitchingPath{{0.0}, {1}, 1.0}, Vector{1.0}, 1e-3), std::invalid_argument);
}

TEST(NormSeries, MatchesStates) {
  const SubsystemFamily fam({VectorField::linear(Matrix{{0, 1}, {-1, 0}})});
  const SwitchingPath path{{0.0}, {0}, 1.0};
  const Trajectory tr = integrate(fam, path, Vector{3.0, 4.0}, 1e-2);
  for (const auto& [t, r] : norm_series(tr)) EXPECT_NEAR(r, 5.0, 1e-9) << t;
}
