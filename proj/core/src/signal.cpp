#include "switchstab/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "switchstab/quadrature.hpp"
#include "switchstab/rng.hpp"

namespace switchstab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kProbabilityTol = 1e-12;

// (1 − e^{−z}) / z with the removable singularity at 0.
double relative_decay(double z) {
  if (std::abs(z) < 1e-6) return 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
  return -std::expm1(-z) / z;
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

void check_probability_row(std::span<const double> row, const char* what) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument(std::string(what) + ": entries must lie in [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilityTol)
    throw std::invalid_argument(std::string(what) + ": entries must sum to 1");
}

}  // namespace

// ---------------------------------------------------------------------------
// HoldingDistribution

HoldingDistribution::HoldingDistribution(Kind kind) : kind_(std::move(kind)) {
  std::visit(overloaded{
                 [](const ExponentialHolding& d) { check_positive(d.rate, "exponential rate"); },
                 [](const UniformHolding& d) { check_positive(d.T, "uniform T"); },
                 [](const PointMassHolding& d) { check_positive(d.T, "point-mass T"); },
                 [](const TabulatedHolding& d) {
                   const auto& k = d.knots;
                   if (k.size() < 2)
                     throw std::invalid_argument("tabulated holding: need at least two knots");
                   if (k.front().first != 0.0 || k.back().first != 1.0)
                     throw std::invalid_argument(
                         "tabulated holding: probabilities must run from 0 to 1");
                   check_positive(k.front().second, "tabulated holding: first duration");
                   for (std::size_t i = 1; i < k.size(); ++i) {
                     if (!(k[i].first > k[i - 1].first) || !(k[i].second > k[i - 1].second))
                       throw std::invalid_argument(
                           "tabulated holding: knots must be strictly increasing");
                     if (!std::isfinite(k[i].second))
                       throw std::invalid_argument("tabulated holding: durations must be finite");
                   }
                 },
             },
             kind_);
}

HoldingDistribution HoldingDistribution::exponential(double rate) {
  return HoldingDistribution(ExponentialHolding{rate});
}
HoldingDistribution HoldingDistribution::uniform(double T) {
  return HoldingDistribution(UniformHolding{T});
}
HoldingDistribution HoldingDistribution::point_mass(double T) {
  return HoldingDistribution(PointMassHolding{T});
}
HoldingDistribution HoldingDistribution::tabulated(std::vector<std::pair<double, double>> knots) {
  return HoldingDistribution(TabulatedHolding{std::move(knots)});
}

std::string HoldingDistribution::name() const {
  return std::visit(overloaded{
                        [](const ExponentialHolding&) { return std::string("exponential"); },
                        [](const UniformHolding&) { return std::string("uniform"); },
                        [](const PointMassHolding&) { return std::string("point_mass"); },
                        [](const TabulatedHolding&) { return std::string("tabulated"); },
                    },
                    kind_);
}

double HoldingDistribution::mean() const {
  return std::visit(overloaded{
                        [](const ExponentialHolding& d) { return 1.0 / d.rate; },
                        [](const UniformHolding& d) { return 0.5 * d.T; },
                        [](const PointMassHolding& d) { return d.T; },
                        [](const TabulatedHolding& d) {
                          double m = 0.0;
                          for (std::size_t i = 1; i < d.knots.size(); ++i) {
                            const auto [p0, s0] = d.knots[i - 1];
                            const auto [p1, s1] = d.knots[i];
                            m += (p1 - p0) * 0.5 * (s0 + s1);
                          }
                          return m;
                        },
                    },
                    kind_);
}

double HoldingDistribution::cdf(double s) const {
  return std::visit(overloaded{
                        [s](const ExponentialHolding& d) {
                          return s <= 0.0 ? 0.0 : -std::expm1(-d.rate * s);
                        },
                        [s](const UniformHolding& d) {
                          return s <= 0.0 ? 0.0 : (s >= d.T ? 1.0 : s / d.T);
                        },
                        [s](const PointMassHolding& d) { return s < d.T ? 0.0 : 1.0; },
                        [s](const TabulatedHolding& d) {
                          const auto& k = d.knots;
                          if (s <= k.front().second) return 0.0;
                          if (s >= k.back().second) return 1.0;
                          auto it = std::upper_bound(
                              k.begin(), k.end(), s,
                              [](double v, const std::pair<double, double>& kn) { return v < kn.second; });
                          const auto& hi = *it;
                          const auto& lo = *(it - 1);
                          return lo.first +
                                 (hi.first - lo.first) * (s - lo.second) / (hi.second - lo.second);
                        },
                    },
                    kind_);
}

double HoldingDistribution::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile: p outside [0, 1]");
  return std::visit(overloaded{
                        [p](const ExponentialHolding& d) { return -std::log1p(-p) / d.rate; },
                        [p](const UniformHolding& d) { return p * d.T; },
                        [](const PointMassHolding& d) { return d.T; },
                        [p](const TabulatedHolding& d) {
                          const auto& k = d.knots;
                          auto it = std::upper_bound(
                              k.begin(), k.end(), p,
                              [](double v, const std::pair<double, double>& kn) { return v < kn.first; });
                          if (it == k.end()) return k.back().second;
                          const auto& hi = *it;
                          const auto& lo = *(it - 1);
                          return lo.second +
                                 (hi.second - lo.second) * (p - lo.first) / (hi.first - lo.first);
                        },
                    },
                    kind_);
}

double HoldingDistribution::sample(Rng& rng) const {
  return std::visit(overloaded{
                        // 1 − U ∈ (0, 1] keeps the logarithm finite.
                        [&rng](const ExponentialHolding& d) {
                          return -std::log(rng.uniform_open_closed()) / d.rate;
                        },
                        [&rng](const UniformHolding& d) { return d.T * rng.uniform_open_closed(); },
                        [](const PointMassHolding& d) { return d.T; },
                        [&rng, this](const TabulatedHolding&) { return quantile(rng.uniform01()); },
                    },
                    kind_);
}

std::optional<double> holding_mgf(const HoldingDistribution& dist, double s) {
  return std::visit(
      overloaded{
          [s](const ExponentialHolding& d) -> std::optional<double> {
            if (!(s > -d.rate)) return std::nullopt;
            return d.rate / (d.rate + s);
          },
          [s](const UniformHolding& d) -> std::optional<double> { return relative_decay(s * d.T); },
          [s](const PointMassHolding& d) -> std::optional<double> { return std::exp(-s * d.T); },
          [s](const TabulatedHolding& d) -> std::optional<double> {
            if (s == 0.0) return 1.0;
            double total = 0.0;
            for (std::size_t i = 1; i < d.knots.size(); ++i) {
              const auto [p0, s0] = d.knots[i - 1];
              const auto [p1, s1] = d.knots[i];
              const double slope = (s1 - s0) / (p1 - p0);
              auto integrand = [=](double p) { return std::exp(-s * (s0 + slope * (p - p0))); };
              total += integrate_adaptive(integrand, p0, p1, 1e-12).value;
            }
            return total;
          },
      },
      dist.kind());
}

// ---------------------------------------------------------------------------
// JumpLaw

JumpLaw::JumpLaw(Kind kind, Matrix probs, Mode initial)
    : kind_(kind), probs_(std::move(probs)), cumulative_(probs_.rows(), probs_.cols()), initial_(initial) {
  if (probs_.cols() == 0) throw std::invalid_argument("jump law: no modes");
  if (initial_ >= probs_.cols()) throw std::invalid_argument("jump law: initial mode out of range");
  for (std::size_t r = 0; r < probs_.rows(); ++r) {
    check_probability_row(probs_.row(r), kind_ == Kind::iid ? "jump law q" : "transition matrix row");
    double c = 0.0;
    for (std::size_t k = 0; k < probs_.cols(); ++k) {
      c += probs_(r, k);
      cumulative_(r, k) = c;
    }
    cumulative_(r, probs_.cols() - 1) = 1.0;
  }
}

JumpLaw JumpLaw::iid(Vector q, Mode initial) {
  Matrix row(1, q.size());
  for (std::size_t k = 0; k < q.size(); ++k) row(0, k) = q[k];
  return JumpLaw(Kind::iid, std::move(row), initial);
}

JumpLaw JumpLaw::markov(Matrix transition, Mode initial) {
  if (!transition.square()) throw std::invalid_argument("transition matrix must be square");
  return JumpLaw(Kind::markov, std::move(transition), initial);
}

Vector JumpLaw::q() const {
  if (kind_ != Kind::iid) throw std::logic_error("jump law q requested for a Markov law");
  return Vector(probs_.row(0).begin(), probs_.row(0).end());
}

Mode JumpLaw::next(Mode current, Rng& rng) const {
  const std::size_t r = kind_ == Kind::iid ? 0 : current;
  const double u = rng.uniform01();
  const auto row = cumulative_.row(r);
  for (std::size_t k = 0; k < row.size(); ++k)
    if (u < row[k]) return k;
  return row.size() - 1;
}

// ---------------------------------------------------------------------------
// SwitchingLaw

std::string to_string(SignalClass c) {
  switch (c) {
    case SignalClass::EH: return "EH";
    case SignalClass::UH: return "UH";
    case SignalClass::GH: return "GH";
  }
  return "?";
}

SignalClass signal_class_from_string(const std::string& s) {
  if (s == "EH") return SignalClass::EH;
  if (s == "UH") return SignalClass::UH;
  if (s == "GH") return SignalClass::GH;
  throw std::invalid_argument("unknown switching class '" + s + "' (expected EH, UH or GH)");
}

SwitchingLaw::SwitchingLaw(SignalClass cls, HoldingDistribution holding, JumpLaw jumps)
    : cls_(cls), holding_(std::move(holding)), jumps_(std::move(jumps)) {
  const bool iid = jumps_.kind() == JumpLaw::Kind::iid;
  switch (cls_) {
    case SignalClass::EH:
      if (!std::holds_alternative<ExponentialHolding>(holding_.kind()) || !iid)
        throw std::invalid_argument("class EH requires exponential holding times and iid jumps");
      break;
    case SignalClass::UH:
      if (!std::holds_alternative<UniformHolding>(holding_.kind()) || !iid)
        throw std::invalid_argument("class UH requires uniform holding times and iid jumps");
      break;
    case SignalClass::GH:
      if (iid) throw std::invalid_argument("class GH requires a Markov jump law");
      break;
  }
}

SwitchingLaw SwitchingLaw::eh(double rate, Vector q, Mode initial) {
  return {SignalClass::EH, HoldingDistribution::exponential(rate), JumpLaw::iid(std::move(q), initial)};
}

SwitchingLaw SwitchingLaw::uh(double T, Vector q, Mode initial) {
  return {SignalClass::UH, HoldingDistribution::uniform(T), JumpLaw::iid(std::move(q), initial)};
}

SwitchingLaw SwitchingLaw::gh(HoldingDistribution holding, Matrix transition, Mode initial) {
  return {SignalClass::GH, std::move(holding), JumpLaw::markov(std::move(transition), initial)};
}

// ---------------------------------------------------------------------------
// Paths

SwitchingPath sample_path(const SwitchingLaw& law, double horizon, std::uint64_t seed) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("sample_path: horizon must be finite and non-negative");
  Rng rng(seed);
  SwitchingPath path;
  path.horizon = horizon;
  path.times.push_back(0.0);
  path.modes.push_back(law.jumps().initial());
  double t = 0.0;
  while (true) {
    const double next = t + law.holding().sample(rng);
    if (next > horizon) break;
    if (!(next > t)) throw std::runtime_error("sample_path: holding time below time resolution");
    path.modes.push_back(law.jumps().next(path.modes.back(), rng));
    path.times.push_back(next);
    t = next;
  }
  return path;
}

Mode mode_at(const SwitchingPath& path, double t) {
  if (!(t >= 0.0 && t <= path.horizon))
    throw std::domain_error("mode_at: t outside [0, horizon]");
  auto it = std::upper_bound(path.times.begin(), path.times.end(), t);
  return path.modes[static_cast<std::size_t>(it - path.times.begin()) - 1];
}

void validate_path(const SwitchingPath& path, std::size_t modes) {
  if (path.times.empty() || path.times.front() != 0.0)
    throw std::invalid_argument("switching path must start at time 0");
  if (path.times.size() != path.modes.size())
    throw std::invalid_argument("switching path: times and modes differ in length");
  for (std::size_t i = 1; i < path.times.size(); ++i)
    if (!(path.times[i] > path.times[i - 1]))
      throw std::invalid_argument("switching path: times must be strictly increasing");
  if (path.times.back() > path.horizon)
    throw std::invalid_argument("switching path: jump beyond horizon");
  for (Mode m : path.modes)
    if (m >= modes) throw std::invalid_argument("switching path: mode index out of range");
}

}  // namespace switchstab
