#include "switchstab/synthesis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace switchstab {

double phi(double a, double b) {
  if (b == 0.0) return 0.0;
  const double r = std::hypot(a, b);
  // For a < 0 the direct sum cancels; a + r = b² / (r − a).
  return a >= 0.0 ? (a + r) / b : b / (r - a);
}

namespace {

struct ScalarTerms {
  double v, lf, w_bar, w_tilde;
};

// Fills lg with L_{g_j}V; grad and field are scratch of length n.
ScalarTerms compute_terms(const SubsystemFamily& family, const LyapunovSpec& v, double lambda, Mode mode,
                          std::span<const double> x, std::span<double> grad, std::span<double> field,
                          std::span<double> lg) {
  v.gradient(x, grad);
  ScalarTerms t{v.value(x), 0.0, 0.0, 0.0};
  family.drift(mode).evaluate(x, field);
  t.lf = dot(grad, field);
  const auto& g = family.control(mode);
  for (std::size_t j = 0; j < g.size(); ++j) {
    g[j].evaluate(x, field);
    lg[j] = dot(grad, field);
    t.w_tilde += lg[j] * lg[j];
  }
  t.w_bar = t.lf + lambda * t.v;
  return t;
}

constexpr std::size_t kInline = 16;

}  // namespace

ClfTerms clf_terms(const SubsystemFamily& family, const LyapunovSpec& v, double lambda, Mode mode,
                   std::span<const double> x) {
  const std::size_t n = family.dimension();
  Vector grad(n), field(n);
  ClfTerms t;
  t.lg.resize(family.control(mode).size());
  const ScalarTerms s = compute_terms(family, v, lambda, mode, x, grad, field, t.lg);
  t.v = s.v;
  t.lf = s.lf;
  t.w_bar = s.w_bar;
  t.w_tilde = s.w_tilde;
  return t;
}

UniversalController::UniversalController(SubsystemFamily family, std::vector<LyapunovSpec> lyapunov, Vector lambda)
    : family_(std::move(family)), v_(std::move(lyapunov)), lambda_(std::move(lambda)) {
  if (!family_.has_control()) throw std::invalid_argument("universal controller: the system has no control fields");
  if (v_.size() != family_.modes() || lambda_.size() != family_.modes())
    throw std::invalid_argument("universal controller: need one Lyapunov function and one rate per mode");
  for (const auto& v : v_)
    if (v.dimension() != family_.dimension())
      throw std::invalid_argument("universal controller: Lyapunov function dimension differs from the system's");
}

void UniversalController::control(Mode mode, std::span<const double> x, std::span<double> u) const {
  const std::size_t n = family_.dimension();
  const std::size_t m = family_.control(mode).size();
  if (n <= kInline && m <= kInline) {
    std::array<double, kInline> grad, field, lg;
    const ScalarTerms t = compute_terms(family_, v_[mode], lambda_[mode], mode, x, std::span(grad).first(n),
                                        std::span(field).first(n), std::span(lg).first(m));
    const double scale = phi(t.w_bar, t.w_tilde);
    for (std::size_t j = 0; j < m; ++j) u[j] = -lg[j] * scale;
    return;
  }
  const ClfTerms t = clf_terms(family_, v_[mode], lambda_[mode], mode, x);
  const double scale = phi(t.w_bar, t.w_tilde);
  for (std::size_t j = 0; j < m; ++j) u[j] = -t.lg[j] * scale;
}

LinearGainController::LinearGainController(Matrix k) : k_(std::move(k)) {
  if (k_.rows() == 0 || k_.cols() == 0) throw std::invalid_argument("linear gain: K must be non-empty");
}

void LinearGainController::control(Mode, std::span<const double> x, std::span<double> u) const {
  multiply(k_, x, u);
}

PolynomialController::PolynomialController(std::vector<Polynomial> components) : k_(std::move(components)) {
  if (k_.empty()) throw std::invalid_argument("polynomial controller: no components");
  for (const auto& p : k_) {
    if (p.dimension() != k_.front().dimension())
      throw std::invalid_argument("polynomial controller: components have different dimensions");
    if (p.has_constant_term()) throw std::invalid_argument("polynomial controller: k(0) must be 0");
  }
}

void PolynomialController::control(Mode, std::span<const double> x, std::span<double> u) const {
  for (std::size_t j = 0; j < k_.size(); ++j) u[j] = k_[j].evaluate(x);
}

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::Universal: return "universal";
    case ControllerKind::LinearGain: return "linear_gain";
    case ControllerKind::Polynomial: return "polynomial";
  }
  return "unknown";
}

std::shared_ptr<const FeedbackLaw> make_controller(const ControllerSpec& spec, const SubsystemFamily& family,
                                                   const CertificateFamily& cert) {
  std::shared_ptr<const FeedbackLaw> law;
  switch (spec.kind) {
    case ControllerKind::Universal:
      law = std::make_shared<UniversalController>(family, cert.V, spec.lambda.empty() ? cert.rates() : spec.lambda);
      break;
    case ControllerKind::LinearGain:
      if (spec.gain.cols() != family.dimension())
        throw std::invalid_argument("linear gain: K must have one column per state");
      law = std::make_shared<LinearGainController>(spec.gain);
      break;
    case ControllerKind::Polynomial:
      law = std::make_shared<PolynomialController>(spec.components);
      if (spec.components.front().dimension() != family.dimension())
        throw std::invalid_argument("polynomial controller: dimension differs from the system's");
      break;
  }
  if (law->inputs() != family.inputs())
    throw std::invalid_argument("controller has " + std::to_string(law->inputs()) + " inputs, the system has " +
                                std::to_string(family.inputs()));
  return law;
}

Vector universal_control(const SubsystemFamily& family, const CertificateFamily& cert, Mode mode,
                         std::span<const double> x) {
  const Vector rates = cert.rates();
  const ClfTerms t = clf_terms(family, cert.V.at(mode), rates.at(mode), mode, x);
  const double scale = phi(t.w_bar, t.w_tilde);
  Vector u(t.lg.size());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = -t.lg[j] * scale;
  return u;
}

VectorField closed_loop_field(const SubsystemFamily& family, std::shared_ptr<const FeedbackLaw> controller,
                              Mode mode) {
  return closed_loop(family.drift(mode), family.control(mode), std::move(controller), mode);
}

std::vector<ClfViolation> verify_clf_condition(const SubsystemFamily& family, const CertificateFamily& cert,
                                               Mode mode, std::span<const Vector> samples, double tol) {
  const Vector rates = cert.rates();
  std::vector<ClfViolation> out;
  for (const auto& x : samples) {
    if (norm2(x) == 0.0) continue;
    const ClfTerms t = clf_terms(family, cert.V.at(mode), rates.at(mode), mode, x);
    const double s = std::max(1.0, std::abs(t.v));
    if (t.w_tilde <= tol * s * s && t.w_bar > tol * s) out.push_back({mode, x, t.w_bar, t.w_tilde});
  }
  return out;
}

std::vector<DecreaseViolation> verify_closed_loop_decrease(const SubsystemFamily& family,
                                                           const CertificateFamily& cert,
                                                           std::shared_ptr<const FeedbackLaw> controller,
                                                           std::span<const Vector> samples, double tol) {
  cert.validate(family.modes(), family.dimension());
  const Vector rates = cert.rates();
  std::vector<DecreaseViolation> out;
  for (Mode i = 0; i < family.modes(); ++i) {
    const VectorField field = controller ? closed_loop_field(family, controller, i) : family.drift(i);
    for (const auto& x : samples) {
      const double v = cert.V[i].value(x);
      const double lie = lie_derivative(cert.V[i], field, x);
      const double residual = lie + rates[i] * v;
      if (residual > tol * std::max(1.0, std::abs(v))) out.push_back({i, x, lie, residual});
    }
  }
  return out;
}

std::vector<ProbeRow> small_control_probe(const SubsystemFamily& family, const CertificateFamily& cert,
                                          std::span<const double> radii, std::size_t directions,
                                          std::uint64_t seed) {
  const auto dirs = unit_directions(family.dimension(), directions, seed);
  std::vector<ProbeRow> rows;
  Vector x(family.dimension());
  for (double r : radii) {
    ProbeRow row{r, 0.0};
    for (const auto& d : dirs) {
      for (std::size_t k = 0; k < x.size(); ++k) x[k] = r * d[k];
      for (Mode i = 0; i < family.modes(); ++i)
        row.max_control = std::max(row.max_control, norm2(universal_control(family, cert, i, x)));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace switchstab
