#include "switchstab/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "switchstab/conditions.hpp"
#include "switchstab/rng.hpp"

namespace switchstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct TrajectoryResult {
  TrajectoryRecord record;
  std::vector<double> alpha1;  // on the report grid, NaN past divergence
  std::vector<double> v;
  std::vector<double> v_switch;
};

TrajectoryResult simulate_one(const SubsystemFamily& family, const Scenario& scn, const EnsembleOptions& opt,
                              const IntegrationOptions& iopt, const std::vector<double>& report_times,
                              std::size_t k, std::uint64_t seed) {
  TrajectoryResult res;
  res.record.index = k;
  res.record.seed = seed;
  const SwitchingPath path = sample_path(scn.law, scn.horizon, seed);
  res.record.jumps = path.jumps();

  const std::size_t grid = report_times.size();
  res.alpha1.assign(grid, std::numeric_limits<double>::quiet_NaN());
  if (scn.cert) res.v.assign(grid, std::numeric_limits<double>::quiet_NaN());

  std::size_t next_report = 0;
  double sup = 0.0;
  double tail = 0.0;
  double last = 0.0;
  const auto& cert = scn.cert;
  const KInfinityBound alpha1 = cert ? cert->alpha1 : KInfinityBound{1.0, 2.0};

  const IntegrationOutcome out = integrate_observed(family, path, scn.x0, iopt, [&](const GridPoint& p) {
    const double r = norm2(p.x);
    sup = std::max(sup, r);
    if (p.t >= opt.tail_start) tail = std::max(tail, r);
    last = r;
    if (p.at_breakpoint) {
      while (next_report < grid && report_times[next_report] < p.t) ++next_report;
      if (next_report < grid && report_times[next_report] == p.t) {
        res.alpha1[next_report] = alpha1(r);
        if (cert) res.v[next_report] = cert->V[p.mode].value(p.x);
        ++next_report;
      }
    }
    if (cert && p.at_switch) res.v_switch.push_back(cert->V[p.mode].value(p.x));
  });

  res.record.divergent = out.divergent;
  if (out.divergent) {
    res.record.sup_norm = kInf;
    res.record.terminal_norm = kInf;
    res.record.tail_sup = kInf;
  } else {
    res.record.sup_norm = sup;
    res.record.terminal_norm = last;
    res.record.tail_sup = tail;
  }
  return res;
}

}  // namespace

void Scenario::validate() const {
  if (law.modes() != family.modes())
    throw std::invalid_argument("scenario: switching law has " + std::to_string(law.modes()) +
                                " modes, system has " + std::to_string(family.modes()));
  if (x0.size() != family.dimension()) throw std::invalid_argument("scenario: x0 has wrong dimension");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("scenario: horizon must be positive");
  if (!(step > 0.0)) throw std::invalid_argument("scenario: step must be positive");
  if (cert) cert->validate(family.modes(), family.dimension());
  if (controller && controller->inputs() != family.inputs())
    throw std::invalid_argument("scenario: controller input count differs from the system's");
}

std::vector<double> EnsembleStats::sup_norms() const {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) v.push_back(r.sup_norm);
  return v;
}

std::vector<double> EnsembleStats::terminal_norms() const {
  std::vector<double> v;
  v.reserve(records.size());
  for (const auto& r : records) v.push_back(r.terminal_norm);
  return v;
}

double EnsembleStats::fraction_terminal_below(double threshold) const {
  if (records.empty()) return 0.0;
  const auto n = std::count_if(records.begin(), records.end(),
                               [threshold](const TrajectoryRecord& r) { return r.terminal_norm < threshold; });
  return static_cast<double>(n) / static_cast<double>(records.size());
}

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::size_t k) { return derive_seed(master_seed, k); }

EnsembleStats run_ensemble(const Scenario& scn, std::size_t trials, std::uint64_t master_seed,
                           const EnsembleOptions& options) {
  if (trials == 0) throw std::invalid_argument("run_ensemble: trials must be at least 1");
  scn.validate();
  if (!(options.tail_start >= 0.0 && options.tail_start <= scn.horizon))
    throw std::invalid_argument("run_ensemble: tail_start must lie in [0, horizon]");
  if (options.report_points < 2) throw std::invalid_argument("run_ensemble: need at least two report points");

  std::optional<SubsystemFamily> closed;
  if (scn.controller) closed.emplace(scn.family.closed_loop(scn.controller));
  const SubsystemFamily& family = closed ? *closed : scn.family;

  std::vector<double> report_times(options.report_points);
  for (std::size_t k = 0; k < report_times.size(); ++k)
    report_times[k] = scn.horizon * static_cast<double>(k) / static_cast<double>(report_times.size() - 1);
  report_times.back() = scn.horizon;

  IntegrationOptions iopt;
  iopt.step = scn.step;
  iopt.breakpoints = report_times;
  iopt.breakpoints.push_back(options.tail_start);
  std::sort(iopt.breakpoints.begin(), iopt.breakpoints.end());
  iopt.breakpoints.erase(std::unique(iopt.breakpoints.begin(), iopt.breakpoints.end()), iopt.breakpoints.end());

  std::vector<TrajectoryResult> results(trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    try {
      for (std::size_t k = next++; k < trials && !failed; k = next++)
        results[k] = simulate_one(family, scn, options, iopt, report_times, k, trajectory_seed(master_seed, k));
    } catch (...) {
      if (!failed.exchange(true)) failure = std::current_exception();
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, trials));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  // Reduction in trajectory-index order for bit reproducibility.
  EnsembleStats stats;
  stats.trials = trials;
  stats.master_seed = master_seed;
  stats.horizon = scn.horizon;
  stats.tail_start = options.tail_start;
  stats.report_times = report_times;
  stats.records.reserve(trials);
  const std::size_t grid = report_times.size();
  std::vector<double> a_sum(grid, 0.0), v_sum(grid, 0.0);
  std::vector<std::size_t> a_cnt(grid, 0);
  std::vector<double> s_mean, s_m2;  // Welford, in index order
  std::vector<std::size_t> s_cnt;
  for (const auto& r : results) {
    stats.records.push_back(r.record);
    if (r.record.divergent) {
      ++stats.divergent_count;
      continue;
    }
    for (std::size_t k = 0; k < grid; ++k) {
      a_sum[k] += r.alpha1[k];
      if (scn.cert) v_sum[k] += r.v[k];
      ++a_cnt[k];
    }
    if (r.v_switch.size() > s_mean.size()) {
      s_mean.resize(r.v_switch.size(), 0.0);
      s_m2.resize(r.v_switch.size(), 0.0);
      s_cnt.resize(r.v_switch.size(), 0);
    }
    for (std::size_t j = 0; j < r.v_switch.size(); ++j) {
      ++s_cnt[j];
      const double d = r.v_switch[j] - s_mean[j];
      s_mean[j] += d / static_cast<double>(s_cnt[j]);
      s_m2[j] += d * (r.v_switch[j] - s_mean[j]);
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  stats.mean_alpha1.resize(grid);
  for (std::size_t k = 0; k < grid; ++k)
    stats.mean_alpha1[k] = a_cnt[k] ? a_sum[k] / static_cast<double>(a_cnt[k]) : nan;
  if (scn.cert) {
    stats.mean_v.resize(grid);
    for (std::size_t k = 0; k < grid; ++k)
      stats.mean_v[k] = a_cnt[k] ? v_sum[k] / static_cast<double>(a_cnt[k]) : nan;
    stats.v_at_switches.resize(s_mean.size());
    for (std::size_t j = 0; j < s_mean.size(); ++j) {
      auto& s = stats.v_at_switches[j];
      s.count = s_cnt[j];
      const double n = static_cast<double>(s.count);
      s.mean = s_mean[j];
      if (s.count > 1) {
        const double var = s_m2[j] / (n - 1.0);
        s.std_error = std::sqrt(var / n);
      }
    }
  }
  return stats;
}

DecayReport decay_check(const EnsembleStats& stats, const CertificateFamily& cert, const SwitchingLaw& law,
                        std::span<const double> x0, std::size_t min_count) {
  const ConditionVerdict verdict = check_for_law(cert, law);
  if (!verdict.satisfied)
    throw std::domain_error("decay_check: the stability condition for class " + to_string(law.signal_class()) +
                            " is not satisfied; no decay is claimed");
  const auto factor = contraction_factor(cert, law);
  if (!factor || !(*factor < 1.0)) throw std::domain_error("decay_check: contraction factor is not below 1");

  DecayReport report;
  report.contraction = *factor;
  report.pass = true;
  report.pass_all_entries = true;
  const std::size_t survivors = stats.trials - stats.divergent_count;
  const double a2 = cert.alpha2(norm2(x0));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t fitted = 0;
  for (std::size_t j = 0; j < stats.v_at_switches.size(); ++j) {
    const auto& s = stats.v_at_switches[j];
    if (s.count < min_count) continue;
    DecayEntry e;
    e.j = j;
    e.count = s.count;
    e.mean = s.mean;
    e.std_error = s.std_error;
    e.bound = a2 * std::pow(*factor, static_cast<double>(j));
    e.ratio = e.bound > 0.0 ? e.mean / e.bound : 0.0;
    e.pass = e.mean > 0.0 ? e.mean <= e.bound * (1.0 + 3.0 * e.std_error / e.mean) : e.mean <= e.bound;
    e.censored = s.count < survivors;
    report.pass_all_entries = report.pass_all_entries && e.pass;
    if (!e.censored) {
      report.pass = report.pass && e.pass;
      if (e.mean > 0.0) {
        const double x = static_cast<double>(j);
        const double y = std::log(e.mean);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++fitted;
      }
    }
    report.entries.push_back(e);
  }
  if (fitted >= 2) {
    const double n = static_cast<double>(fitted);
    report.fitted_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  } else {
    report.fitted_slope = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

ProbabilityEstimate wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) throw std::invalid_argument("wilson_interval: no trials");
  if (successes > trials) throw std::invalid_argument("wilson_interval: more successes than trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  // The endpoints are exact at 0 and n; rounding would otherwise put them just inside.
  const double lower = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double upper = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {p, lower, upper, successes, trials};
}

ProbabilityEstimate gasp_estimate(const EnsembleStats& stats, double eps, double t_star) {
  if (t_star != stats.tail_start)
    throw std::invalid_argument("gasp_estimate: T* differs from the tail start used for the run");
  const auto exceed = static_cast<std::size_t>(std::count_if(
      stats.records.begin(), stats.records.end(), [eps](const TrajectoryRecord& r) { return r.tail_sup > eps; }));
  return wilson_interval(exceed, stats.records.size());
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double hi = values[mid];
  if (values.size() % 2) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace switchstab
