// Subsystem families ẋ = f_i(x) (+ Σ_j g_{i,j}(x) u_j) and fixed-step RK4
// integration of the switched system along a sampled switching path.
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "switchstab/linalg.hpp"
#include "switchstab/polynomial.hpp"
#include "switchstab/signal.hpp"

namespace switchstab {

/// State feedback u = k_σ(x). Implementations must be immutable and
/// thread-safe; the mode argument is ignored by mode-independent laws.
class FeedbackLaw {
 public:
  virtual ~FeedbackLaw() = default;
  virtual std::size_t inputs() const = 0;
  virtual void control(Mode mode, std::span<const double> x, std::span<double> u) const = 0;
};

struct LinearField {
  Matrix A;
};

struct PolynomialField {
  std::vector<Polynomial> components;  ///< one polynomial per state coordinate
};

struct ClosedLoopData;

/// f(x) + Σ_j g_j(x) k_j(x) for a fixed mode; shares its parts immutably.
struct ClosedLoopField {
  std::shared_ptr<const ClosedLoopData> data;
};

/// A closed-form vector field with f(0) = 0.
class VectorField {
 public:
  using Spec = std::variant<LinearField, PolynomialField, ClosedLoopField>;

  /// Throws std::invalid_argument for non-square matrices, mixed dimensions
  /// or polynomial components with a constant monomial.
  explicit VectorField(Spec spec);

  static VectorField linear(Matrix a);
  static VectorField polynomial(std::vector<Polynomial> components);

  const Spec& spec() const { return spec_; }
  std::size_t dimension() const { return n_; }
  bool is_linear() const { return std::holds_alternative<LinearField>(spec_); }

  /// out = f(x); spans must have length dimension(), `out` must not alias `x`.
  void evaluate(std::span<const double> x, std::span<double> out) const;
  /// Checked evaluation; throws std::domain_error on dimension mismatch.
  Vector operator()(std::span<const double> x) const;

 private:
  Spec spec_;
  std::size_t n_ = 0;
};

struct ClosedLoopData {
  VectorField drift;
  std::vector<VectorField> control_fields;
  std::shared_ptr<const FeedbackLaw> law;
  Mode mode = 0;
};

/// Evaluates f(x) + Σ_j g_j(x) k_j(x) for the given pieces.
VectorField closed_loop(VectorField drift, std::vector<VectorField> control_fields,
                        std::shared_ptr<const FeedbackLaw> law, Mode mode);

/// N drift fields in dimension n, optionally with m control fields per mode.
class SubsystemFamily {
 public:
  /// Throws std::invalid_argument on inconsistent dimensions or an empty family.
  explicit SubsystemFamily(std::vector<VectorField> drift,
                           std::vector<std::vector<VectorField>> control = {});

  std::size_t dimension() const { return n_; }
  std::size_t modes() const { return drift_.size(); }
  std::size_t inputs() const { return m_; }
  bool has_control() const { return m_ > 0; }

  const VectorField& drift(Mode i) const { return drift_.at(i); }
  const std::vector<VectorField>& control(Mode i) const { return control_.at(i); }
  bool all_linear() const;

  /// Family of closed-loop fields f_i + Σ_j g_{i,j} k_j, without inputs.
  SubsystemFamily closed_loop(std::shared_ptr<const FeedbackLaw> law) const;

 private:
  std::vector<VectorField> drift_;
  std::vector<std::vector<VectorField>> control_;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
};

struct IntegrationOptions {
  double step = 1e-3;
  /// ‖x‖ above this (or a non-finite state) marks the realization divergent.
  double divergence_threshold = 1e12;
  /// Extra instants the integrator lands on exactly (mode unchanged there).
  std::vector<double> breakpoints;
};

/// A point of the integration grid as seen by an observer.
struct GridPoint {
  double t;
  Mode mode;                    ///< mode active on [t, next grid point)
  std::span<const double> x;
  bool at_switch;               ///< t is a switching instant τ_j (τ_0 = 0 included)
  bool at_breakpoint;           ///< t is one of IntegrationOptions::breakpoints
  std::size_t jump_index;       ///< number of switching instants ≤ t
};

using GridObserver = std::function<void(const GridPoint&)>;

struct IntegrationOutcome {
  bool divergent = false;
  double divergence_time = 0.0;  ///< meaningful when divergent
  std::size_t points = 0;
};

/// Streams every grid point to `observe`. Each inter-switch segment (and each
/// piece between breakpoints) is integrated with classical RK4 at the fixed
/// step, the final substep shortened to land on the boundary exactly.
IntegrationOutcome integrate_observed(const SubsystemFamily& family, const SwitchingPath& path,
                                      std::span<const double> x0, const IntegrationOptions& options,
                                      const GridObserver& observe);

struct Trajectory {
  std::size_t dimension = 0;
  std::vector<double> times;
  std::vector<Mode> modes;
  std::vector<double> states;  ///< row-major, dimension entries per grid point
  SwitchingPath path;
  bool divergent = false;
  double divergence_time = 0.0;

  std::size_t size() const { return times.size(); }
  std::span<const double> state(std::size_t k) const {
    return {states.data() + k * dimension, dimension};
  }
};

/// Integrates the switched system; with a controller the closed loop
/// f_i + Σ g_{i,j} k_j is integrated, the law evaluated at every RK4 stage.
Trajectory integrate(const SubsystemFamily& family, const SwitchingPath& path,
                     std::span<const double> x0, double step,
                     std::shared_ptr<const FeedbackLaw> controller = nullptr);

Trajectory integrate(const SubsystemFamily& family, const SwitchingPath& path,
                     std::span<const double> x0, const IntegrationOptions& options,
                     std::shared_ptr<const FeedbackLaw> controller = nullptr);

/// (t, ‖x(t)‖) on the trajectory grid.
std::vector<std::pair<double, double>> norm_series(const Trajectory& traj);

}  // namespace switchstab
