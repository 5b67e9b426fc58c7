// Semi-Markov switching signals: holding-time laws, jump-destination laws,
// sampled switching paths and holding-time moment generating functions.
//
// Modes are 0-based internally. File formats (scenario files, CSV) use
// 1-based mode labels; conversion happens at the I/O boundary.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "switchstab/linalg.hpp"

namespace switchstab {

class Rng;

using Mode = std::size_t;

struct ExponentialHolding {
  double rate;
};
struct UniformHolding {
  double T;  ///< support (0, T]
};
struct PointMassHolding {
  double T;
};
/// Inverse CDF given on a grid of (probability, duration) knots, linearly
/// interpolated. The first knot has probability 0 and the last probability 1.
struct TabulatedHolding {
  std::vector<std::pair<double, double>> knots;
};

/// Holding-time distribution of the i.i.d. sequence S_i = τ_i − τ_{i−1}.
class HoldingDistribution {
 public:
  using Kind = std::variant<ExponentialHolding, UniformHolding, PointMassHolding, TabulatedHolding>;

  /// Throws std::invalid_argument when parameters are out of range.
  explicit HoldingDistribution(Kind kind);

  static HoldingDistribution exponential(double rate);
  static HoldingDistribution uniform(double T);
  static HoldingDistribution point_mass(double T);
  static HoldingDistribution tabulated(std::vector<std::pair<double, double>> knots);

  const Kind& kind() const { return kind_; }
  std::string name() const;

  double mean() const;
  double cdf(double s) const;
  double quantile(double p) const;
  double sample(Rng& rng) const;

 private:
  Kind kind_;
};

/// E[exp(−s·S)] for the holding time S. Returns std::nullopt when the
/// expectation diverges (exponential law with s ≤ −rate).
std::optional<double> holding_mgf(const HoldingDistribution& dist, double s);

/// Distribution of jump destinations σ(τ_j), j ≥ 1.
class JumpLaw {
 public:
  enum class Kind { iid, markov };

  /// i.i.d. destinations with probability vector q.
  static JumpLaw iid(Vector q, Mode initial);
  /// Discrete-time Markov chain with row-stochastic transition matrix.
  static JumpLaw markov(Matrix transition, Mode initial);

  Kind kind() const { return kind_; }
  std::size_t modes() const { return probs_.cols(); }
  Mode initial() const { return initial_; }

  /// Probability vector q (iid only).
  Vector q() const;
  /// Transition matrix; for iid laws every row equals q.
  const Matrix& transition() const { return probs_; }

  Mode next(Mode current, Rng& rng) const;

 private:
  JumpLaw(Kind kind, Matrix probs, Mode initial);

  Kind kind_;
  Matrix probs_;  // iid: 1×N, markov: N×N
  Matrix cumulative_;
  Mode initial_;
};

enum class SignalClass { EH, UH, GH };

std::string to_string(SignalClass c);
SignalClass signal_class_from_string(const std::string& s);

/// A switching law of class EH, UH or GH. Holding times and destinations are
/// sampled from independent draws.
class SwitchingLaw {
 public:
  /// Throws std::invalid_argument when the class tag disagrees with the
  /// component kinds (EH: exponential + iid, UH: uniform + iid, GH: markov).
  SwitchingLaw(SignalClass cls, HoldingDistribution holding, JumpLaw jumps);

  static SwitchingLaw eh(double rate, Vector q, Mode initial);
  static SwitchingLaw uh(double T, Vector q, Mode initial);
  static SwitchingLaw gh(HoldingDistribution holding, Matrix transition, Mode initial);

  SignalClass signal_class() const { return cls_; }
  const HoldingDistribution& holding() const { return holding_; }
  const JumpLaw& jumps() const { return jumps_; }
  std::size_t modes() const { return jumps_.modes(); }

 private:
  SignalClass cls_;
  HoldingDistribution holding_;
  JumpLaw jumps_;
};

/// One realization of σ on [0, horizon]: jump instants and post-jump modes.
struct SwitchingPath {
  std::vector<double> times;  ///< times[0] == 0, strictly increasing
  std::vector<Mode> modes;    ///< modes[i] active on [times[i], times[i+1])
  double horizon = 0.0;

  std::size_t jumps() const { return times.empty() ? 0 : times.size() - 1; }
};

/// Samples a path; the first jump beyond `horizon` is discarded.
SwitchingPath sample_path(const SwitchingLaw& law, double horizon, std::uint64_t seed);

/// Right-continuous evaluation of σ(t). Throws std::domain_error when t is
/// outside [0, horizon].
Mode mode_at(const SwitchingPath& path, double t);

/// Throws std::invalid_argument unless times/modes are consistent.
void validate_path(const SwitchingPath& path, std::size_t modes);

}  // namespace switchstab
