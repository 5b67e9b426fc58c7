// Feedback synthesis for control-affine families ẋ = f_i(x) + Σ_j g_{i,j}(x) u_j
// with unconstrained inputs: the mode-dependent universal formula and
// mode-independent linear / polynomial laws, plus pointwise verification.
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "switchstab/certificates.hpp"
#include "switchstab/dynamics.hpp"

namespace switchstab {

/// (a + √(a² + b²)) / b for b ≠ 0, and 0 for b = 0.
double phi(double a, double b);

/// Lie-derivative quantities of V_i along mode i at a point.
struct ClfTerms {
  double v = 0.0;
  double lf = 0.0;      ///< L_f V_i
  Vector lg;            ///< L_{g_j} V_i, one per input
  double w_bar = 0.0;   ///< L_f V_i + λ_i V_i
  double w_tilde = 0.0; ///< Σ_j (L_{g_j} V_i)²
};

ClfTerms clf_terms(const SubsystemFamily& family, const LyapunovSpec& v, double lambda, Mode mode,
                   std::span<const double> x);

/// u_j = −L_{g_{i,j}}V_i(x) · φ(W̄_i(x), W̃_i(x)).
class UniversalController final : public FeedbackLaw {
 public:
  /// Throws std::invalid_argument if the family has no control fields or
  /// the sizes of `lyapunov` / `lambda` differ from the mode count.
  UniversalController(SubsystemFamily family, std::vector<LyapunovSpec> lyapunov, Vector lambda);

  std::size_t inputs() const override { return family_.inputs(); }
  void control(Mode mode, std::span<const double> x, std::span<double> u) const override;

  const std::vector<LyapunovSpec>& lyapunov() const { return v_; }
  const Vector& lambda() const { return lambda_; }

 private:
  SubsystemFamily family_;
  std::vector<LyapunovSpec> v_;
  Vector lambda_;
};

/// u = K x, shared by all modes. K is m × n.
class LinearGainController final : public FeedbackLaw {
 public:
  explicit LinearGainController(Matrix k);
  std::size_t inputs() const override { return k_.rows(); }
  void control(Mode mode, std::span<const double> x, std::span<double> u) const override;
  const Matrix& gain() const { return k_; }

 private:
  Matrix k_;
};

/// u_j = k̄_j(x) with polynomial components vanishing at 0, shared by all modes.
class PolynomialController final : public FeedbackLaw {
 public:
  explicit PolynomialController(std::vector<Polynomial> components);
  std::size_t inputs() const override { return k_.size(); }
  void control(Mode mode, std::span<const double> x, std::span<double> u) const override;
  const std::vector<Polynomial>& components() const { return k_; }

 private:
  std::vector<Polynomial> k_;
};

enum class ControllerKind { Universal, LinearGain, Polynomial };

std::string to_string(ControllerKind kind);

struct ControllerSpec {
  ControllerKind kind = ControllerKind::Universal;
  /// Universal: target rates λ_i; empty means the certificate's rates.
  Vector lambda;
  Matrix gain;                       ///< LinearGain
  std::vector<Polynomial> components; ///< Polynomial

  bool mode_dependent() const { return kind == ControllerKind::Universal; }
};

/// Instantiates the law. Universal controllers take V_i from `cert`.
std::shared_ptr<const FeedbackLaw> make_controller(const ControllerSpec& spec, const SubsystemFamily& family,
                                                   const CertificateFamily& cert);

/// Universal-formula control at x for mode i with the certificate's rates.
Vector universal_control(const SubsystemFamily& family, const CertificateFamily& cert, Mode mode,
                         std::span<const double> x);

/// f_i + Σ_j g_{i,j} k_j as a single field.
VectorField closed_loop_field(const SubsystemFamily& family, std::shared_ptr<const FeedbackLaw> controller,
                              Mode mode);

struct ClfViolation {
  Mode mode = 0;
  Vector x;
  double w_bar = 0.0;
  double w_tilde = 0.0;
};

/// Samples where no input can achieve the decrease: W̃_i ≤ tol·s² and
/// W̄_i > tol·s, s = max(1, V_i(x)). Samples at the origin are skipped.
std::vector<ClfViolation> verify_clf_condition(const SubsystemFamily& family, const CertificateFamily& cert,
                                               Mode mode, std::span<const Vector> samples, double tol = 1e-9);

struct DecreaseViolation {
  Mode mode = 0;
  Vector x;
  double lie = 0.0;       ///< L_{f_i + g_i k} V_i(x)
  double residual = 0.0;  ///< lie + λ_i V_i(x)
};

/// Samples and modes where L_{f_i+Σg_{i,j}k_j}V_i(x) > −λ_i V_i(x) + tol·max(1, V_i(x)).
std::vector<DecreaseViolation> verify_closed_loop_decrease(const SubsystemFamily& family,
                                                           const CertificateFamily& cert,
                                                           std::shared_ptr<const FeedbackLaw> controller,
                                                           std::span<const Vector> samples, double tol = 1e-9);

struct ProbeRow {
  double radius = 0.0;
  double max_control = 0.0;  ///< max ‖u‖ over all modes and probe directions
};

/// Max ‖universal_control‖ over `directions` unit directions at each radius.
std::vector<ProbeRow> small_control_probe(const SubsystemFamily& family, const CertificateFamily& cert,
                                          std::span<const double> radii, std::size_t directions = 100,
                                          std::uint64_t seed = 0x9E0B);

}  // namespace switchstab
