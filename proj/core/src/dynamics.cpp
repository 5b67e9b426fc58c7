#include "switchstab/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace switchstab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Stack storage for short work vectors, heap beyond that.
class Scratch {
 public:
  explicit Scratch(std::size_t n) : n_(n) {
    if (n > kInline) heap_.resize(n);
  }
  std::span<double> span() { return {n_ > kInline ? heap_.data() : inline_.data(), n_}; }

 private:
  static constexpr std::size_t kInline = 16;
  std::size_t n_;
  std::array<double, kInline> inline_{};
  std::vector<double> heap_;
};

std::size_t spec_dimension(const VectorField::Spec& spec) {
  return std::visit(overloaded{
                        [](const LinearField& f) {
                          if (!f.A.square())
                            throw std::invalid_argument("linear field: matrix must be square");
                          return f.A.rows();
                        },
                        [](const PolynomialField& f) {
                          const std::size_t n = f.components.size();
                          if (n == 0) throw std::invalid_argument("polynomial field: no components");
                          for (const auto& p : f.components) {
                            if (p.dimension() != n)
                              throw std::invalid_argument(
                                  "polynomial field: component dimension differs from state dimension");
                            if (p.has_constant_term())
                              throw std::invalid_argument(
                                  "polynomial field: constant monomial violates f(0) = 0");
                          }
                          return n;
                        },
                        [](const ClosedLoopField& f) {
                          if (!f.data || !f.data->law)
                            throw std::invalid_argument("closed-loop field: missing parts");
                          const std::size_t n = f.data->drift.dimension();
                          if (f.data->control_fields.size() != f.data->law->inputs())
                            throw std::invalid_argument(
                                "closed-loop field: controller input count differs from control fields");
                          for (const auto& g : f.data->control_fields)
                            if (g.dimension() != n)
                              throw std::invalid_argument("closed-loop field: control field dimension");
                          return n;
                        },
                    },
                    spec);
}

}  // namespace

VectorField::VectorField(Spec spec) : spec_(std::move(spec)), n_(spec_dimension(spec_)) {}

VectorField VectorField::linear(Matrix a) { return VectorField(LinearField{std::move(a)}); }

VectorField VectorField::polynomial(std::vector<Polynomial> components) {
  return VectorField(PolynomialField{std::move(components)});
}

void VectorField::evaluate(std::span<const double> x, std::span<double> out) const {
  std::visit(overloaded{
                 [&](const LinearField& f) { multiply(f.A, x, out); },
                 [&](const PolynomialField& f) {
                   for (std::size_t k = 0; k < n_; ++k) out[k] = f.components[k].evaluate(x);
                 },
                 [&](const ClosedLoopField& f) {
                   const ClosedLoopData& d = *f.data;
                   d.drift.evaluate(x, out);
                   const std::size_t m = d.control_fields.size();
                   if (m == 0) return;
                   Scratch u(m);
                   Scratch g(n_);
                   d.law->control(d.mode, x, u.span());
                   for (std::size_t j = 0; j < m; ++j) {
                     const double uj = u.span()[j];
                     if (uj == 0.0) continue;
                     d.control_fields[j].evaluate(x, g.span());
                     for (std::size_t k = 0; k < n_; ++k) out[k] += g.span()[k] * uj;
                   }
                 },
             },
             spec_);
}

Vector VectorField::operator()(std::span<const double> x) const {
  if (x.size() != n_)
    throw std::domain_error("vector field: state has dimension " + std::to_string(x.size()) +
                            ", expected " + std::to_string(n_));
  Vector out(n_);
  evaluate(x, out);
  return out;
}

VectorField closed_loop(VectorField drift, std::vector<VectorField> control_fields,
                        std::shared_ptr<const FeedbackLaw> law, Mode mode) {
  auto data = std::make_shared<ClosedLoopData>(
      ClosedLoopData{std::move(drift), std::move(control_fields), std::move(law), mode});
  return VectorField(ClosedLoopField{std::move(data)});
}

// ---------------------------------------------------------------------------

SubsystemFamily::SubsystemFamily(std::vector<VectorField> drift,
                                 std::vector<std::vector<VectorField>> control)
    : drift_(std::move(drift)), control_(std::move(control)) {
  if (drift_.empty()) throw std::invalid_argument("subsystem family: no modes");
  n_ = drift_.front().dimension();
  for (const auto& f : drift_)
    if (f.dimension() != n_) throw std::invalid_argument("subsystem family: drift dimensions differ");
  if (control_.empty()) {
    control_.resize(drift_.size());
  } else {
    if (control_.size() != drift_.size())
      throw std::invalid_argument("subsystem family: control fields must be given for every mode");
    m_ = control_.front().size();
    for (const auto& gs : control_) {
      if (gs.size() != m_)
        throw std::invalid_argument("subsystem family: modes have different input counts");
      for (const auto& g : gs)
        if (g.dimension() != n_)
          throw std::invalid_argument("subsystem family: control field dimension differs");
    }
  }
}

bool SubsystemFamily::all_linear() const {
  return std::all_of(drift_.begin(), drift_.end(), [](const VectorField& f) { return f.is_linear(); });
}

SubsystemFamily SubsystemFamily::closed_loop(std::shared_ptr<const FeedbackLaw> law) const {
  if (!law) throw std::invalid_argument("closed_loop: null controller");
  if (law->inputs() != m_)
    throw std::invalid_argument("closed_loop: controller has " + std::to_string(law->inputs()) +
                                " inputs, family has " + std::to_string(m_));
  std::vector<VectorField> fields;
  fields.reserve(drift_.size());
  for (Mode i = 0; i < drift_.size(); ++i)
    fields.push_back(switchstab::closed_loop(drift_[i], control_[i], law, i));
  return SubsystemFamily(std::move(fields));
}

// ---------------------------------------------------------------------------

IntegrationOutcome integrate_observed(const SubsystemFamily& family, const SwitchingPath& path,
                                      std::span<const double> x0, const IntegrationOptions& options,
                                      const GridObserver& observe) {
  const std::size_t n = family.dimension();
  if (x0.size() != n) throw std::invalid_argument("integrate: x0 has wrong dimension");
  if (!(options.step > 0.0) || !std::isfinite(options.step))
    throw std::invalid_argument("integrate: step must be positive");
  validate_path(path, family.modes());

  // Boundaries: switching instants, breakpoints and the horizon, merged.
  std::vector<double> bounds;
  bounds.reserve(path.times.size() + options.breakpoints.size() + 1);
  bounds.insert(bounds.end(), path.times.begin() + 1, path.times.end());
  for (double b : options.breakpoints)
    if (b > 0.0 && b <= path.horizon) bounds.push_back(b);
  bounds.push_back(path.horizon);
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  std::vector<double> breaks = options.breakpoints;
  std::sort(breaks.begin(), breaks.end());
  auto is_break = [&](double t) { return std::binary_search(breaks.begin(), breaks.end(), t); };

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  IntegrationOutcome outcome;

  std::size_t jump = 0;  // index into path of the active segment
  Mode mode = path.modes[0];
  auto emit = [&](double t, bool at_switch, bool at_break) {
    observe(GridPoint{t, mode, x, at_switch, at_break, jump});
    ++outcome.points;
  };
  auto diverged = [&](double t) {
    bool bad = false;
    for (double v : x) bad = bad || !std::isfinite(v);
    if (bad || norm2(x) > options.divergence_threshold) {
      outcome.divergent = true;
      outcome.divergence_time = t;
      return true;
    }
    return false;
  };

  if (diverged(0.0)) return outcome;
  emit(0.0, true, is_break(0.0));

  const double h = options.step;
  double a = 0.0;
  for (double b : bounds) {
    if (b <= a) continue;
    const VectorField* f = &family.drift(mode);
    const double len = b - a;
    auto full = static_cast<std::size_t>(std::floor(len / h));
    const double rem = len - static_cast<double>(full) * h;
    const std::size_t steps = (full >= 1 && rem <= 1e-9 * h) ? full : full + 1;

    double t = a;
    for (std::size_t s = 0; s < steps; ++s) {
      const double t_next = (s + 1 == steps) ? b : a + static_cast<double>(s + 1) * h;
      const double dt = t_next - t;
      f->evaluate(x, k1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
      f->evaluate(tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
      f->evaluate(tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
      f->evaluate(tmp, k4);
      for (std::size_t i = 0; i < n; ++i)
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      t = t_next;
      if (diverged(t)) return outcome;
      if (s + 1 < steps) emit(t, false, false);
    }

    const bool at_switch = jump + 1 < path.times.size() && path.times[jump + 1] == b;
    if (at_switch) {
      ++jump;
      mode = path.modes[jump];
    }
    emit(b, at_switch, is_break(b));
    a = b;
  }
  return outcome;
}

Trajectory integrate(const SubsystemFamily& family, const SwitchingPath& path,
                     std::span<const double> x0, double step,
                     std::shared_ptr<const FeedbackLaw> controller) {
  IntegrationOptions options;
  options.step = step;
  return integrate(family, path, x0, options, std::move(controller));
}

Trajectory integrate(const SubsystemFamily& family, const SwitchingPath& path,
                     std::span<const double> x0, const IntegrationOptions& options,
                     std::shared_ptr<const FeedbackLaw> controller) {
  const SubsystemFamily* target = &family;
  std::optional<SubsystemFamily> closed;
  if (controller) {
    closed.emplace(family.closed_loop(std::move(controller)));
    target = &*closed;
  }
  Trajectory traj;
  traj.dimension = family.dimension();
  traj.path = path;
  const IntegrationOutcome out =
      integrate_observed(*target, path, x0, options, [&traj](const GridPoint& p) {
        traj.times.push_back(p.t);
        traj.modes.push_back(p.mode);
        traj.states.insert(traj.states.end(), p.x.begin(), p.x.end());
      });
  traj.divergent = out.divergent;
  traj.divergence_time = out.divergence_time;
  return traj;
}

std::vector<std::pair<double, double>> norm_series(const Trajectory& traj) {
  std::vector<std::pair<double, double>> out;
  out.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) out.emplace_back(traj.times[k], norm2(traj.state(k)));
  return out;
}

}  // namespace switchstab
