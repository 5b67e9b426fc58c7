// Trajectory ensembles and the empirical statistics behind almost-sure,
// in-the-mean and in-probability stability claims. Passing these checks is
// evidence for fixed (ε, T, x0) instances, not a proof.
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "switchstab/certificates.hpp"
#include "switchstab/dynamics.hpp"
#include "switchstab/signal.hpp"

namespace switchstab {

struct Scenario {
  SubsystemFamily family;
  SwitchingLaw law;
  std::optional<CertificateFamily> cert;
  Vector x0;
  double horizon = 10.0;
  double step = 1e-3;
  std::shared_ptr<const FeedbackLaw> controller;

  /// Throws std::invalid_argument on inconsistent dimensions or mode counts.
  void validate() const;
};

struct EnsembleOptions {
  double tail_start = 0.0;
  /// Points of the common report grid on [0, horizon] for mean statistics.
  std::size_t report_points = 201;
  /// Worker threads; 0 selects the hardware concurrency.
  unsigned threads = 0;
};

struct TrajectoryRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double sup_norm = 0.0;       ///< +inf when divergent
  double terminal_norm = 0.0;  ///< +inf when divergent
  double tail_sup = 0.0;       ///< sup over t ≥ tail_start; +inf when divergent
  std::size_t jumps = 0;
  bool divergent = false;
};

struct SwitchStatistic {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

struct EnsembleStats {
  std::size_t trials = 0;
  std::uint64_t master_seed = 0;
  double horizon = 0.0;
  double tail_start = 0.0;
  std::vector<TrajectoryRecord> records;  ///< sorted by index
  std::vector<double> report_times;
  std::vector<double> mean_alpha1;        ///< E[α_1(‖x(t)‖)] over non-divergent runs
  std::vector<double> mean_v;             ///< E[V_σ(t)(x(t))]; empty without a certificate
  std::vector<SwitchStatistic> v_at_switches;  ///< index j: V_σ(τ_j)(x(τ_j)); empty without a certificate
  std::size_t divergent_count = 0;

  std::vector<double> sup_norms() const;
  std::vector<double> terminal_norms() const;
  /// Fraction of trajectories with terminal norm below `threshold`.
  double fraction_terminal_below(double threshold) const;
};

/// Seed of trajectory k under `master_seed`.
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::size_t k);

/// Integrates `trials` independently seeded trajectories. Results are
/// bit-identical for equal inputs regardless of the thread count.
EnsembleStats run_ensemble(const Scenario& scn, std::size_t trials, std::uint64_t master_seed,
                           const EnsembleOptions& options = {});

struct DecayEntry {
  std::size_t j = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  double ratio = 0.0;  ///< mean / bound
  bool pass = false;
  /// Some non-divergent trajectory did not reach jump j before the horizon.
  /// Survivors had short holding times, so the mean is biased upward.
  bool censored = false;
};

struct DecayReport {
  double contraction = 0.0;  ///< η(0), or θ̂ under GH switching
  std::vector<DecayEntry> entries;
  bool pass = false;              ///< every uncensored entry passes
  bool pass_all_entries = false;  ///< every entry passes, censored ones included
  /// Least-squares slope of log(mean) against j over uncensored entries; NaN
  /// with fewer than two of them.
  double fitted_slope = 0.0;
};

/// Compares E[V_σ(τ_j)(x(τ_j))] with α_2(‖x_0‖)·η(0)^j for every j with at
/// least `min_count` samples; an entry passes when mean ≤ bound·(1 + 3·SE/mean).
/// Throws std::domain_error when the stability condition for the law is not
/// satisfied.
DecayReport decay_check(const EnsembleStats& stats, const CertificateFamily& cert, const SwitchingLaw& law,
                        std::span<const double> x0, std::size_t min_count = 100);

struct ProbabilityEstimate {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t exceed = 0;
  std::size_t trials = 0;
};

/// Wilson score interval for `successes` out of `trials` (z = 1.96 by default).
ProbabilityEstimate wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

/// Fraction of trajectories with tail_sup > eps. Throws std::invalid_argument
/// unless `t_star` equals the tail start used for the run.
ProbabilityEstimate gasp_estimate(const EnsembleStats& stats, double eps, double t_star);

double median(std::vector<double> values);

}  // namespace switchstab
