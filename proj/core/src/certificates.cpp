#include "switchstab/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "switchstab/rng.hpp"

namespace switchstab {

namespace {

constexpr double kStrictMuEpsilon = 1e-9;

double max_abs(const Matrix& m) {
  double worst = 0.0;
  for (double v : m.data()) worst = std::max(worst, std::abs(v));
  return worst;
}

std::size_t spec_dimension(const LyapunovSpec::Spec& spec) {
  if (const auto* q = std::get_if<QuadraticLyapunov>(&spec)) {
    const Matrix& p = q->P;
    if (!p.square() || p.rows() == 0)
      throw std::invalid_argument("quadratic Lyapunov function: P must be square");
    if (asymmetry(p) > 1e-12 * std::max(1.0, max_abs(p)))
      throw std::invalid_argument("quadratic Lyapunov function: P must be symmetric");
    if (!(symmetric_eigenvalues(p).front() > 0.0))
      throw std::invalid_argument("quadratic Lyapunov function: P must be positive definite");
    return p.rows();
  }
  const auto& poly = std::get<PolynomialLyapunov>(spec).form;
  const std::size_t n = poly.dimension();
  if (n == 0) throw std::invalid_argument("polynomial Lyapunov function: zero dimension");
  if (poly.has_constant_term())
    throw std::invalid_argument("polynomial Lyapunov function: constant term violates V(0) = 0");
  auto directions = unit_directions(n, 256, 0xC0FFEE);
  // Random directions miss forms that vanish on a coordinate axis.
  for (std::size_t i = 0; i < n; ++i)
    for (double sign : {1.0, -1.0}) {
      Vector e(n, 0.0);
      e[i] = sign;
      directions.push_back(std::move(e));
    }
  for (const auto& d : directions)
    if (!(poly.evaluate(d) > 0.0))
      throw std::invalid_argument("polynomial Lyapunov function: not positive on the unit sphere");
  return n;
}

double gaussian(Rng& rng) {
  // Box–Muller; uniform_open_closed keeps the logarithm finite.
  const double u1 = rng.uniform_open_closed();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

LyapunovSpec::LyapunovSpec(Spec spec) : spec_(std::move(spec)), n_(spec_dimension(spec_)) {}

LyapunovSpec LyapunovSpec::quadratic(Matrix p) { return LyapunovSpec(QuadraticLyapunov{std::move(p)}); }

LyapunovSpec LyapunovSpec::polynomial(Polynomial form) {
  return LyapunovSpec(PolynomialLyapunov{std::move(form)});
}

const Matrix& LyapunovSpec::matrix() const {
  if (const auto* q = std::get_if<QuadraticLyapunov>(&spec_)) return q->P;
  throw std::logic_error("Lyapunov function is not quadratic");
}

double LyapunovSpec::value(std::span<const double> x) const {
  if (const auto* q = std::get_if<QuadraticLyapunov>(&spec_)) return quadratic_form(q->P, x);
  return std::get<PolynomialLyapunov>(spec_).form.evaluate(x);
}

void LyapunovSpec::gradient(std::span<const double> x, std::span<double> grad) const {
  if (const auto* q = std::get_if<QuadraticLyapunov>(&spec_)) {
    // ∇(xᵀPx) = 2Px for symmetric P
    multiply(q->P, x, grad);
    for (double& g : grad) g *= 2.0;
    return;
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  std::get<PolynomialLyapunov>(spec_).form.accumulate_gradient(x, grad);
}

double lyapunov_value(const LyapunovSpec& v, std::span<const double> x) {
  if (x.size() != v.dimension()) throw std::domain_error("lyapunov_value: dimension mismatch");
  return v.value(x);
}

double lie_derivative(const LyapunovSpec& v, const VectorField& f, std::span<const double> x) {
  if (x.size() != v.dimension() || f.dimension() != v.dimension())
    throw std::domain_error("lie_derivative: dimension mismatch");
  Vector grad(x.size());
  Vector fx(x.size());
  v.gradient(x, grad);
  f.evaluate(x, fx);
  return dot(grad, fx);
}

double extract_lambda_quadratic(const Matrix& p, const Matrix& a) {
  if (!p.square() || !a.square() || p.rows() != a.rows())
    throw std::domain_error("extract_lambda_quadratic: dimension mismatch");
  if (asymmetry(p) > 1e-12 * std::max(1.0, max_abs(p)))
    throw std::domain_error("extract_lambda_quadratic: P not symmetric");
  const Matrix l = cholesky(p);
  const Matrix s = a.transposed() * p + p * a;
  return -symmetric_eigenvalues(congruence_by_inverse(l, s)).back();
}

Matrix extract_lambda_matrix(std::span<const LyapunovSpec> certs, const SubsystemFamily& family) {
  const std::size_t n_modes = family.modes();
  if (certs.size() != n_modes)
    throw std::invalid_argument("extract_lambda_matrix: need one Lyapunov function per mode");
  Matrix lam(n_modes, n_modes);
  for (Mode j = 0; j < n_modes; ++j) {
    const auto* lin = std::get_if<LinearField>(&family.drift(j).spec());
    if (!lin) throw std::invalid_argument("extract_lambda_matrix: drift fields must be linear");
    for (Mode i = 0; i < n_modes; ++i) lam(i, j) = extract_lambda_quadratic(certs[i].matrix(), lin->A);
  }
  return lam;
}

double extract_mu(std::span<const LyapunovSpec> certs) {
  if (certs.empty()) throw std::invalid_argument("extract_mu: no certificates");
  double mu = 1.0;
  for (std::size_t j = 0; j < certs.size(); ++j) {
    const Matrix lj = cholesky(certs[j].matrix());
    for (std::size_t i = 0; i < certs.size(); ++i) {
      if (i == j) continue;
      mu = std::max(mu, symmetric_eigenvalues(congruence_by_inverse(lj, certs[i].matrix())).back());
    }
  }
  return mu;
}

double strict_mu(double mu_star) { return std::max(mu_star, 1.0 + kStrictMuEpsilon); }

double KInfinityBound::operator()(double r) const {
  if (power == 2.0) return coeff * r * r;
  return coeff * std::pow(r, power);
}

Vector CertificateFamily::rates() const {
  if (lambda) return *lambda;
  if (lambda_matrix) {
    Vector d(lambda_matrix->rows());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*lambda_matrix)(i, i);
    return d;
  }
  throw std::logic_error("certificate carries no decay rates");
}

void CertificateFamily::validate(std::size_t modes, std::size_t dimension) const {
  if (V.size() != modes) throw std::invalid_argument("certificate: need one Lyapunov function per mode");
  for (const auto& v : V)
    if (v.dimension() != dimension)
      throw std::invalid_argument("certificate: Lyapunov function dimension differs from state dimension");
  if (!(mu > 1.0)) throw std::invalid_argument("certificate: mu must be strictly greater than 1");
  if (lambda && lambda->size() != modes)
    throw std::invalid_argument("certificate: lambda must have one entry per mode");
  if (lambda_matrix && (lambda_matrix->rows() != modes || lambda_matrix->cols() != modes))
    throw std::invalid_argument("certificate: lambda matrix must be N x N");
  if (!(alpha1.coeff > 0.0) || !(alpha2.coeff > 0.0) || !(alpha1.power > 0.0) || !(alpha2.power > 0.0))
    throw std::invalid_argument("certificate: class-K-infinity bounds need positive coefficients");
}

std::pair<KInfinityBound, KInfinityBound> quadratic_sandwich(std::span<const LyapunovSpec> certs) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& c : certs) {
    const Vector eig = symmetric_eigenvalues(c.matrix());
    lo = std::min(lo, eig.front());
    hi = std::max(hi, eig.back());
  }
  return {KInfinityBound{lo, 2.0}, KInfinityBound{hi, 2.0}};
}

CertificateFamily certify_linear(std::vector<LyapunovSpec> certs, const SubsystemFamily& family,
                                 std::optional<double> mu_override) {
  for (const auto& c : certs)
    if (!c.is_quadratic()) throw std::invalid_argument("certify_linear: Lyapunov functions must be quadratic");
  CertificateFamily cert;
  cert.lambda_matrix = extract_lambda_matrix(certs, family);
  Vector diag(family.modes());
  for (Mode i = 0; i < diag.size(); ++i) diag[i] = (*cert.lambda_matrix)(i, i);
  cert.lambda = std::move(diag);
  cert.mu = mu_override ? *mu_override : strict_mu(extract_mu(certs));
  std::tie(cert.alpha1, cert.alpha2) = quadratic_sandwich(certs);
  cert.V = std::move(certs);
  return cert;
}

std::vector<Violation> verify_pointwise(const SubsystemFamily& family, const CertificateFamily& cert,
                                        std::span<const Vector> samples, double tol) {
  cert.validate(family.modes(), family.dimension());
  const std::size_t n_modes = family.modes();
  const Vector rates = cert.lambda_matrix ? Vector{} : cert.rates();
  std::vector<Violation> out;
  Vector values(n_modes);
  for (const auto& x : samples) {
    const double r = norm2(x);
    for (Mode i = 0; i < n_modes; ++i) values[i] = cert.V[i].value(x);
    for (Mode i = 0; i < n_modes; ++i) {
      const double vi = values[i];
      const double limit = tol * std::max(1.0, std::abs(vi));
      auto report = [&](const char* id, Mode j, double residual) {
        if (residual > limit) out.push_back(Violation{id, i, j, x, residual});
      };
      report("V1", i, cert.alpha1(r) - vi);
      report("V1", i, vi - cert.alpha2(r));
      if (cert.lambda_matrix) {
        for (Mode j = 0; j < n_modes; ++j)
          report("V2'", j, lie_derivative(cert.V[i], family.drift(j), x) + (*cert.lambda_matrix)(i, j) * vi);
      } else {
        report("V2", i, lie_derivative(cert.V[i], family.drift(i), x) + rates[i] * vi);
      }
      for (Mode j = 0; j < n_modes; ++j)
        if (j != i) report("V3", j, vi - cert.mu * values[j]);
    }
  }
  return out;
}

std::vector<Vector> unit_directions(std::size_t dimension, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> dirs;
  dirs.reserve(count);
  while (dirs.size() < count) {
    Vector d(dimension);
    if (dimension == 1) {
      d[0] = (rng() >> 63) ? 1.0 : -1.0;
    } else {
      for (double& v : d) v = gaussian(rng);
      const double len = norm2(d);
      if (!(len > 1e-12)) continue;
      for (double& v : d) v /= len;
    }
    dirs.push_back(std::move(d));
  }
  return dirs;
}

std::vector<Vector> default_samples(std::size_t dimension, std::size_t count, std::uint64_t seed) {
  std::vector<Vector> samples = unit_directions(dimension, count, seed);
  Rng rng(derive_seed(seed, 1));
  for (auto& d : samples) {
    const double radius = std::pow(10.0, -2.0 + 4.0 * rng.uniform01());
    for (double& v : d) v *= radius;
  }
  samples.emplace_back(dimension, 0.0);
  return samples;
}

}  // namespace switchstab
