// Multiple Lyapunov functions: evaluation, Lie derivatives, extraction of the
// tight constants λ_i, λ_{i,j}, μ for quadratic certificates, and pointwise
// verification of the sandwich / decay / comparability inequalities.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "switchstab/dynamics.hpp"
#include "switchstab/linalg.hpp"
#include "switchstab/polynomial.hpp"

namespace switchstab {

struct QuadraticLyapunov {
  Matrix P;  ///< V(x) = xᵀ P x
};

struct PolynomialLyapunov {
  Polynomial form;
};

/// A continuously differentiable positive-definite V with exact gradient.
class LyapunovSpec {
 public:
  using Spec = std::variant<QuadraticLyapunov, PolynomialLyapunov>;

  /// Quadratic: P symmetric within 1e-12 (relative to its largest entry) and
  /// positive definite. Polynomial: no constant term, positive on a fixed
  /// sample of the unit sphere. Throws std::invalid_argument otherwise.
  explicit LyapunovSpec(Spec spec);

  static LyapunovSpec quadratic(Matrix p);
  static LyapunovSpec polynomial(Polynomial form);

  const Spec& spec() const { return spec_; }
  std::size_t dimension() const { return n_; }
  bool is_quadratic() const { return std::holds_alternative<QuadraticLyapunov>(spec_); }
  const Matrix& matrix() const;  ///< quadratic only

  double value(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> grad) const;

 private:
  Spec spec_;
  std::size_t n_ = 0;
};

double lyapunov_value(const LyapunovSpec& v, std::span<const double> x);

/// L_f V(x) = ⟨∇V(x), f(x)⟩ with the exact gradient.
double lie_derivative(const LyapunovSpec& v, const VectorField& f, std::span<const double> x);

/// Largest λ with AᵀP + PA + λP ⪯ 0. Throws std::domain_error unless P is
/// symmetric positive definite and A square of matching size.
double extract_lambda_quadratic(const Matrix& p, const Matrix& a);

/// λ_{i,j} = extract_lambda_quadratic(P_i, A_j): row = Lyapunov function,
/// column = active vector field.
Matrix extract_lambda_matrix(std::span<const LyapunovSpec> certs, const SubsystemFamily& family);

/// μ* = max_{i,j} λ_max(L_j⁻¹ P_i L_j⁻ᵀ), the tightest constant with V_i ≤ μ V_j.
double extract_mu(std::span<const LyapunovSpec> certs);

/// Strict comparability constant: max(μ*, 1 + 1e-9).
double strict_mu(double mu_star);

/// α(r) = coeff · r^power.
struct KInfinityBound {
  double coeff = 1.0;
  double power = 2.0;
  double operator()(double r) const;
};

/// Certificate family: Lyapunov functions plus the constants they witness.
struct CertificateFamily {
  std::vector<LyapunovSpec> V;
  /// Per-mode rates λ_i (diagonal form) ...
  std::optional<Vector> lambda;
  /// ... or the full λ_{i,j} matrix.
  std::optional<Matrix> lambda_matrix;
  double mu = 1.0 + 1e-9;
  KInfinityBound alpha1;
  KInfinityBound alpha2;

  /// Per-mode rates: `lambda`, or the diagonal of `lambda_matrix`.
  Vector rates() const;
  /// Throws std::invalid_argument if mu ≤ 1 or sizes disagree.
  void validate(std::size_t modes, std::size_t dimension) const;
};

/// α_1 = min_i λ_min(P_i)·r², α_2 = max_i λ_max(P_i)·r² (quadratic only).
std::pair<KInfinityBound, KInfinityBound> quadratic_sandwich(std::span<const LyapunovSpec> certs);

/// Builds a fully populated certificate for linear drifts and quadratic
/// Lyapunov functions: λ_i, λ_{i,j}, μ (strictified unless `mu_override`)
/// and the quadratic sandwich bounds.
CertificateFamily certify_linear(std::vector<LyapunovSpec> certs, const SubsystemFamily& family,
                                 std::optional<double> mu_override = std::nullopt);

struct Violation {
  std::string inequality;  ///< "V1", "V2", "V2'", "V3"
  Mode mode_i = 0;
  Mode mode_j = 0;
  Vector x;
  double residual = 0.0;
};

/// Checks (V1), (V2) or (V2′), and (V3) at every sample. A residual counts as
/// a violation when it exceeds tol · max(1, V_i(x)).
std::vector<Violation> verify_pointwise(const SubsystemFamily& family, const CertificateFamily& cert,
                                        std::span<const Vector> samples, double tol = 1e-9);

/// 10³ points log-uniform in radius over [1e-2, 1e2] with uniform
/// directions, plus the origin. Deterministic in `seed`.
std::vector<Vector> default_samples(std::size_t dimension, std::size_t count = 1000,
                                    std::uint64_t seed = 0x5EED);

/// Uniformly distributed unit vectors.
std::vector<Vector> unit_directions(std::size_t dimension, std::size_t count, std::uint64_t seed);

}  // namespace switchstab
