// Sufficient conditions for almost-sure and mean stability under EH, UH and
// GH switching, the per-switch contraction factor η(κ), and the UH mean bound.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "switchstab/certificates.hpp"
#include "switchstab/linalg.hpp"
#include "switchstab/signal.hpp"

namespace switchstab {

struct ConditionVerdict {
  std::string condition;  ///< "EH", "UH" or "GH"
  bool satisfied = false;
  /// 1 − (evaluated sum), or 1 − θ̂ for GH.
  double margin = 0.0;
  /// EH/UH: per-mode summands. GH: per-row sums (the max is θ̂).
  std::vector<double> terms;
  std::optional<std::string> inapplicable_reason;

  /// The evaluated sum (EH/UH) or θ̂ (GH).
  double value() const { return 1.0 - margin; }
};

/// λ_i + rate > 0 for all i, and Σ μ q_i / (1 + λ_i/rate) < 1.
ConditionVerdict check_eh(std::span<const double> lambda, double mu, std::span<const double> q, double rate);

/// Σ μ q_i (1 − e^{−λ_i T}) / (λ_i T) < 1, λ_i = 0 terms taken as μ q_i.
ConditionVerdict check_uh(std::span<const double> lambda, double mu, std::span<const double> q, double T);

/// θ̂ = max_i Σ_j μ p_{i,j} E[e^{−λ_{j,i} S}] < 1. λ_{j,i}: row j = Lyapunov
/// function of the destination mode, column i = mode active while holding.
ConditionVerdict check_gh(const Matrix& lambda, double mu, const Matrix& transition,
                          const HoldingDistribution& holding);

enum class EtaKind { EH, UH };

/// η(κ) = Σ_j μ^{1+κ} q_j E[e^{−(1+κ) λ_j S}] for exponential (rate) or
/// uniform (T) holding. std::nullopt when (1+κ)λ_j + rate ≤ 0 for some j (EH).
std::optional<double> eta_kappa(EtaKind kind, double kappa, std::span<const double> lambda, double mu,
                                std::span<const double> q, double rate_or_T);

/// M α_2(‖x_0‖) / (1 − η(0)) with M = max_i (1/λ_i − (1 − e^{−λ_i T})/(λ_i² T)),
/// bounding sup_t E[V_σ(t)(x(t))]. Throws std::domain_error when η(0) ≥ 1.
double mean_bound_uh(const CertificateFamily& cert, const SwitchingLaw& law, double x0_norm);

/// Evaluates the condition that matches the law's class using the
/// certificate's rates (EH/UH) or rate matrix (GH).
ConditionVerdict check_for_law(const CertificateFamily& cert, const SwitchingLaw& law);

/// Per-switch contraction factor for the decay bound: η(0) for EH/UH, θ̂ for GH.
std::optional<double> contraction_factor(const CertificateFamily& cert, const SwitchingLaw& law);

}  // namespace switchstab
