#include "switchstab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>

namespace switchstab {

namespace {

// (1 − e^{−z}) / z
double relative_decay(double z) {
  if (std::abs(z) < 1e-6) return 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
  return -std::expm1(-z) / z;
}

// (z − 1 + e^{−z}) / z², the UH integral weight scaled by 1/T.
double integral_weight(double z) {
  if (std::abs(z) < 1e-6) return 0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0;
  return (z + std::expm1(-z)) / (z * z);
}

void check_sizes(std::span<const double> lambda, std::span<const double> q) {
  if (lambda.size() != q.size() || lambda.empty())
    throw std::invalid_argument("condition check: lambda and q must have the same nonzero length");
}

}  // namespace

ConditionVerdict check_eh(std::span<const double> lambda, double mu, std::span<const double> q, double rate) {
  check_sizes(lambda, q);
  ConditionVerdict v;
  v.condition = "EH";
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] + rate > 0.0)) {
      v.inapplicable_reason = "(E3) violated for mode " + std::to_string(i + 1);
      v.margin = -std::numeric_limits<double>::infinity();
      v.terms.clear();
      return v;
    }
    v.terms.push_back(mu * q[i] / (1.0 + lambda[i] / rate));
  }
  double sum = 0.0;
  for (double t : v.terms) sum += t;
  v.margin = 1.0 - sum;
  v.satisfied = v.margin > 0.0;
  return v;
}

ConditionVerdict check_uh(std::span<const double> lambda, double mu, std::span<const double> q, double T) {
  check_sizes(lambda, q);
  if (!(T > 0.0)) throw std::invalid_argument("check_uh: T must be positive");
  ConditionVerdict v;
  v.condition = "UH";
  double sum = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    v.terms.push_back(mu * q[i] * relative_decay(lambda[i] * T));
    sum += v.terms.back();
  }
  v.margin = 1.0 - sum;
  v.satisfied = v.margin > 0.0;
  return v;
}

ConditionVerdict check_gh(const Matrix& lambda, double mu, const Matrix& transition,
                          const HoldingDistribution& holding) {
  const std::size_t n = transition.rows();
  if (!transition.square() || !lambda.square() || lambda.rows() != n || n == 0)
    throw std::invalid_argument("check_gh: lambda and transition must both be N x N");
  ConditionVerdict v;
  v.condition = "GH";
  double theta = -std::numeric_limits<double>::infinity();
  for (Mode i = 0; i < n; ++i) {
    double row = 0.0;
    for (Mode j = 0; j < n; ++j) {
      const auto mgf = holding_mgf(holding, lambda(j, i));
      if (!mgf) {
        v.inapplicable_reason = "holding-time MGF diverges at s = lambda(" + std::to_string(j + 1) + "," +
                                std::to_string(i + 1) + ")";
        v.margin = -std::numeric_limits<double>::infinity();
        v.terms.clear();
        return v;
      }
      row += mu * transition(i, j) * *mgf;
    }
    v.terms.push_back(row);
    theta = std::max(theta, row);
  }
  v.margin = 1.0 - theta;
  v.satisfied = v.margin > 0.0;
  return v;
}

std::optional<double> eta_kappa(EtaKind kind, double kappa, std::span<const double> lambda, double mu,
                                std::span<const double> q, double rate_or_T) {
  check_sizes(lambda, q);
  if (!(kappa >= 0.0)) throw std::invalid_argument("eta_kappa: kappa must be non-negative");
  const double scale = 1.0 + kappa;
  const double mu_k = std::pow(mu, scale);
  double sum = 0.0;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    if (kind == EtaKind::EH) {
      if (!(scale * lambda[j] + rate_or_T > 0.0)) return std::nullopt;
      sum += mu_k * q[j] / (1.0 + lambda[j] * scale / rate_or_T);
    } else {
      sum += mu_k * q[j] * relative_decay(lambda[j] * scale * rate_or_T);
    }
  }
  return sum;
}

double mean_bound_uh(const CertificateFamily& cert, const SwitchingLaw& law, double x0_norm) {
  if (law.signal_class() != SignalClass::UH) throw std::invalid_argument("mean_bound_uh: law must be UH");
  const double T = std::get<UniformHolding>(law.holding().kind()).T;
  const Vector lambda = cert.rates();
  const Vector q = law.jumps().q();
  const double eta0 = *eta_kappa(EtaKind::UH, 0.0, lambda, cert.mu, q, T);
  if (!(eta0 < 1.0)) throw std::domain_error("mean_bound_uh: eta(0) >= 1, the UH condition fails");
  double m = -std::numeric_limits<double>::infinity();
  for (double l : lambda) m = std::max(m, T * integral_weight(l * T));
  return m * cert.alpha2(x0_norm) / (1.0 - eta0);
}

ConditionVerdict check_for_law(const CertificateFamily& cert, const SwitchingLaw& law) {
  switch (law.signal_class()) {
    case SignalClass::EH:
      return check_eh(cert.rates(), cert.mu, law.jumps().q(),
                      std::get<ExponentialHolding>(law.holding().kind()).rate);
    case SignalClass::UH:
      return check_uh(cert.rates(), cert.mu, law.jumps().q(), std::get<UniformHolding>(law.holding().kind()).T);
    case SignalClass::GH:
      if (!cert.lambda_matrix) throw std::invalid_argument("GH condition needs the full lambda matrix");
      return check_gh(*cert.lambda_matrix, cert.mu, law.jumps().transition(), law.holding());
  }
  throw std::logic_error("unknown signal class");
}

std::optional<double> contraction_factor(const CertificateFamily& cert, const SwitchingLaw& law) {
  switch (law.signal_class()) {
    case SignalClass::EH:
      return eta_kappa(EtaKind::EH, 0.0, cert.rates(), cert.mu, law.jumps().q(),
                       std::get<ExponentialHolding>(law.holding().kind()).rate);
    case SignalClass::UH:
      return eta_kappa(EtaKind::UH, 0.0, cert.rates(), cert.mu, law.jumps().q(),
                       std::get<UniformHolding>(law.holding().kind()).T);
    case SignalClass::GH: {
      const ConditionVerdict v = check_for_law(cert, law);
      if (v.inapplicable_reason) return std::nullopt;
      return v.value();
    }
  }
  return std::nullopt;
}

}  // namespace switchstab
