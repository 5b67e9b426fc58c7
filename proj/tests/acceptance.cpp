// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"
#include "switchstab/certificates.hpp"
#include "switchstab/conditions.hpp"
#include "switchstab/dynamics.hpp"
#include "switchstab/montecarlo.hpp"
#include "switchstab/quadrature.hpp"
#include "switchstab/scenario.hpp"
#include "switchstab/signal.hpp"
#include "switchstab/synthesis.hpp"

using namespace switchstab;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = SWITCHSTAB_SCENARIO_DIR;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome condition_arithmetic() {
  const Vector lam{2.0, -2.0};
  const ConditionVerdict ok = check_eh(lam, 1.01, Vector{0.8, 0.2}, 6.0);
  const ConditionVerdict bad = check_eh(lam, 1.01, Vector{0.5, 0.5}, 6.0);
  const ConditionVerdict slow = check_eh(lam, 1.01, Vector{0.8, 0.2}, 2.0);

  constexpr int kReps = 10000;
  double sink = 0.0;
  const auto t0 = Clock::now();
  for (int k = 0; k < kReps; ++k) sink += check_eh(lam, 1.01, Vector{0.8, 0.2}, 6.0).margin;
  const double per_call = seconds_since(t0) / kReps;

  const bool pass = std::abs(ok.value() - 0.909) <= 1e-12 && ok.satisfied && std::abs(bad.value() - 1.13625) <= 1e-12 &&
                    !bad.satisfied && slow.inapplicable_reason && !slow.satisfied && per_call < 1e-3 && sink > 0.0;
  return {pass, fmt("sum=%.15g satisfied=%d; q=(.5,.5) sum=%.15g satisfied=%d; rate=2 -> %s; %.3g us/call", ok.value(),
                    ok.satisfied, bad.value(), bad.satisfied,
                    slow.inapplicable_reason ? slow.inapplicable_reason->c_str() : "(applicable)", per_call * 1e6)};
}

Outcome mgf_identities() {
  std::vector<double> grid;
  for (int k = 0; k < 20; ++k) grid.push_back(-1.5 + 0.5 * k);

  // Density forms; the exponential tail beyond 80 is below e^{-40}.
  auto exp_quad = [](double rate, double s) {
    return integrate_adaptive([=](double x) { return rate * std::exp(-(rate + s) * x); }, 0.0, 80.0, 1e-13).value;
  };
  auto unif_quad = [](double T, double s) {
    return integrate_adaptive([=](double x) { return std::exp(-s * x) / T; }, 0.0, T, 1e-13).value;
  };
  // Quantile form E[g(S)] = ∫₀¹ g(Q(p)) dp with Q ≡ 1.
  auto point_quad = [](double s) {
    return integrate_adaptive([=](double) { return std::exp(-s * 1.0); }, 0.0, 1.0, 1e-13).value;
  };

  double worst = 0.0;
  for (double s : grid) {
    const double e = std::abs(*holding_mgf(HoldingDistribution::exponential(2.0), s) - exp_quad(2.0, s));
    const double u = std::abs(*holding_mgf(HoldingDistribution::uniform(2.0), s) - unif_quad(2.0, s));
    const double p = std::abs(*holding_mgf(HoldingDistribution::point_mass(1.0), s) - point_quad(s));
    worst = std::max({worst, e, u, p});
  }

  double worst_gh = 0.0;
  for (double lam : {-3.0, -1.0, 0.0, 0.5, 2.0, 5.0}) {
    const double gh = check_gh(Matrix{{lam}}, 1.01, Matrix{{1.0}}, HoldingDistribution::exponential(6.0)).terms[0];
    const double eh = check_eh(Vector{lam}, 1.01, Vector{1.0}, 6.0).terms[0];
    worst_gh = std::max(worst_gh, std::abs(gh - eh));
  }
  return {worst <= 1e-10 && worst_gh <= 1e-12,
          fmt("max |closed form - quadrature| = %.3g over 20 s-values x 3 laws; max |GH - EH term| = %.3g", worst,
              worst_gh)};
}

Outcome integrator_order() {
  const auto t0 = Clock::now();
  const std::vector<double> rates{-7.0, 6.5, -9.0};
  const SubsystemFamily fam({VectorField::linear(Matrix{{rates[0]}}), VectorField::linear(Matrix{{rates[1]}}),
                             VectorField::linear(Matrix{{rates[2]}})});
  const SwitchingPath path{{0.0, 0.3, 0.55, 0.9, 1.2, 1.7}, {0, 1, 2, 1, 0, 2}, 2.0};
  auto exact = [&](double t) {
    double g = 0.0;
    for (std::size_t k = 0; k < path.times.size(); ++k) {
      const double end = k + 1 < path.times.size() ? std::min(path.times[k + 1], t) : t;
      if (end <= path.times[k]) break;
      g += rates[path.modes[k]] * (end - path.times[k]);
    }
    return std::exp(g);
  };
  const Trajectory fine = integrate(fam, path, Vector{1.0}, 1e-3);
  double worst = 0.0;
  for (std::size_t k = 0; k < fine.size(); ++k) worst = std::max(worst, std::abs(fine.state(k)[0] - exact(fine.times[k])));
  const Trajectory coarse = integrate(fam, path, Vector{1.0}, 2e-3);
  const double e1 = std::abs(fine.state(fine.size() - 1)[0] - exact(2.0));
  const double e2 = std::abs(coarse.state(coarse.size() - 1)[0] - exact(2.0));
  const double ratio = e2 / e1;
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-8 && ratio >= 12.0 && ratio <= 20.0 && elapsed < 1.0,
          fmt("max error %.3g at h=1e-3; error ratio %.4g; %.3g s", worst, ratio, elapsed)};
}

Outcome certificate_extraction() {
  const Matrix i2 = Matrix::identity(2);
  const double a = extract_lambda_quadratic(i2, -1.0 * i2);
  const double b = extract_lambda_quadratic(i2, i2);
  const double c = extract_lambda_quadratic(i2, Matrix{{0, 1}, {-1, 0}});
  const std::vector<LyapunovSpec> pair{LyapunovSpec::quadratic(i2), LyapunovSpec::quadratic(2.0 * i2)};
  const double mu = extract_mu(pair);
  bool ref = std::abs(a - 2.0) <= 1e-10 && std::abs(b + 2.0) <= 1e-10 && std::abs(c) <= 1e-10 &&
             std::abs(mu - 2.0) <= 1e-10;

  const Matrix p1{{2, 0.3}, {0.3, 1}}, p2{{1, -0.2}, {-0.2, 3}};
  const SubsystemFamily fam(
      {VectorField::linear(Matrix{{-1, 2}, {0, -3}}), VectorField::linear(Matrix{{0.5, 1}, {-1, -0.2}})});
  const std::vector<LyapunovSpec> base{LyapunovSpec::quadratic(p1), LyapunovSpec::quadratic(p2)};
  const Matrix l0 = extract_lambda_matrix(base, fam);
  const double mu0 = extract_mu(base);
  double worst = 0.0;
  for (double s : {1e-3, 0.37, 5.0, 1e4}) {
    const std::vector<LyapunovSpec> scaled{LyapunovSpec::quadratic(s * p1), LyapunovSpec::quadratic(s * p2)};
    const Matrix l1 = extract_lambda_matrix(scaled, fam);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j) worst = std::max(worst, std::abs(l0(i, j) - l1(i, j)));
    worst = std::max(worst, std::abs(mu0 - extract_mu(scaled)));
  }
  return {ref && worst <= 1e-10,
          fmt("lambda: -I -> %.12g, I -> %.12g, skew -> %.3g; mu(I,2I) = %.12g; scaling drift %.3g", a, b, c, mu, worst)};
}

struct Loaded {
  ScenarioFile file;
  CertificateFamily cert;
};

Loaded load_with_certificate(const char* name) {
  ScenarioFile f = load_scenario(kScenarios / name);
  CertificateFamily cert = resolve_certificate(*f.certificate, f.family).cert;
  return {std::move(f), std::move(cert)};
}

EnsembleStats run_file(const Loaded& l) {
  EnsembleOptions eo;
  eo.tail_start = l.file.run.tail_start;
  eo.report_points = l.file.run.report_points;
  return run_ensemble(make_scenario(l.file, l.cert), l.file.run.trials, l.file.run.seed, eo);
}

Outcome per_switch_decay() {
  const auto t0 = Clock::now();
  const Loaded l = load_with_certificate("eh_two_mode.json");
  const EnsembleStats stats = run_file(l);
  const DecayReport r = decay_check(stats, l.cert, l.file.law, l.file.run.x0, 100);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  for (const auto& e : r.entries) worst = std::max(worst, e.mean / (e.bound * (1.0 + 3.0 * e.std_error / e.mean)));
  return {stats.trials == 10000 && stats.horizon == 20.0 && std::abs(r.contraction - 0.909) <= 1e-12 &&
              r.pass_all_entries && elapsed < 60.0,
          fmt("%zu trajectories, eta(0)=%.6g, %zu switch indices with >=100 samples, worst mean/allowance %.4g, %.3g s",
              stats.trials, r.contraction, r.entries.size(), worst, elapsed)};
}

Outcome mean_bound() {
  const Loaded l = load_with_certificate("uh_single_mode.json");
  const EnsembleStats stats = run_file(l);
  const double bound = mean_bound_uh(l.cert, l.file.law, norm2(l.file.run.x0));
  const double sup = *std::max_element(stats.mean_v.begin(), stats.mean_v.end());
  return {stats.trials == 10000 && std::abs((*l.cert.lambda)[0] - 1.0) <= 1e-12 && sup <= bound,
          fmt("sup_t mean V = %.6g <= bound %.10g over %zu trajectories", sup, bound, stats.trials)};
}

Outcome negative_control() {
  const Loaded l = load_with_certificate("eh_negative_control.json");
  const EnsembleStats stats = run_file(l);
  const double med = median(stats.terminal_norms());
  const ConditionVerdict v = check_for_law(l.cert, l.file.law);
  const double x0 = norm2(l.file.run.x0);
  return {stats.horizon == 20.0 && med > x0 && !v.satisfied,
          fmt("median terminal norm %.6g > |x0| = %g; condition sum %.6g, satisfied=%d", med, x0, v.value(),
              v.satisfied)};
}

Outcome universal_formula() {
  const ScenarioFile f = load_scenario(kScenarios / "synthesis_scalar.json");
  CertificateFamily targets;
  targets.V = f.certificate->V;
  targets.lambda = f.controller->lambda;
  targets.mu = *f.certificate->mu;
  const SubsystemFamily& fam = f.family;

  // 10³ random samples, origin excluded, all with W̃ > 0.
  auto samples = default_samples(fam.dimension(), 1000, 0xACCE);
  samples.pop_back();
  double worst = 0.0;
  std::size_t used = 0;
  for (Mode i = 0; i < fam.modes(); ++i) {
    for (const auto& x : samples) {
      const ClfTerms t = clf_terms(fam, targets.V[i], (*targets.lambda)[i], i, x);
      if (!(t.w_tilde > 0.0)) continue;
      ++used;
      const Vector u = universal_control(fam, targets, i, x);
      double lhs = t.lf;
      for (std::size_t j = 0; j < u.size(); ++j) lhs += u[j] * t.lg[j];
      const double rhs = -(*targets.lambda)[i] * t.v - std::hypot(t.w_bar, t.w_tilde);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
  }
  const auto law = make_controller(*f.controller, fam, targets);
  const auto decrease = verify_closed_loop_decrease(fam, targets, law, default_samples(fam.dimension()));

  std::ostringstream out, err;
  const int check_code = app::run_check(kScenarios / "synthesis_scalar.json", out, err);

  const SubsystemFamily closed = fam.closed_loop(law);
  CertificateInput in = *f.certificate;
  in.lambda = targets.lambda;
  const CertificateFamily cert = resolve_certificate(in, closed).cert;
  EnsembleOptions eo;
  eo.tail_start = f.run.tail_start;
  const EnsembleStats stats = run_ensemble(make_scenario(f, cert, law), f.run.trials, f.run.seed, eo);
  const double frac = stats.fraction_terminal_below(1e-2);

  return {used == 1000 && worst <= 1e-9 && decrease.empty() && check_code == app::kExitOk && frac >= 0.99 &&
              stats.horizon == 20.0,
          fmt("identity residual %.3g over %zu samples; %zu decrease violations; check exit %d; "
              "fraction |x(20)| < 1e-2 = %.4g over %zu trajectories",
              worst, used, decrease.size(), check_code, frac, stats.trials)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / "switchstab_acceptance_repro";
  fs::remove_all(root);
  std::vector<std::string> outputs[2];
  int codes[2] = {-1, -1};
  const std::vector<std::string> files{"summary.json", "trajectories.csv", "path_7.csv", "trajectory_7.csv"};
  for (int r = 0; r < 2; ++r) {
    app::Options o;
    o.trials = 1000;
    o.export_trajectory = 7;
    o.out_dir = root / std::to_string(r);
    std::ostringstream out, err;
    codes[r] = app::run_simulate(kScenarios / "eh_two_mode.json", o, out, err);
    for (const auto& f : files) outputs[r].push_back(slurp(o.out_dir / f));
  }
  bool same = true;
  std::size_t bytes = 0;
  for (std::size_t k = 0; k < files.size(); ++k) {
    same = same && !outputs[0][k].empty() && outputs[0][k] == outputs[1][k];
    bytes += outputs[0][k].size();
  }
  fs::remove_all(root);
  return {same && codes[0] == app::kExitOk && codes[1] == app::kExitOk,
          fmt("%zu files, %zu bytes, identical=%d, exit codes %d/%d", files.size(), bytes, same, codes[0], codes[1])};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "condition arithmetic", condition_arithmetic},
      {2, "holding-time MGF identities", mgf_identities},
      {3, "integrator order and exactness", integrator_order},
      {4, "certificate extraction", certificate_extraction},
      {5, "per-switch decay (EH, 10^4 trajectories)", per_switch_decay},
      {6, "UH mean bound", mean_bound},
      {7, "negative control", negative_control},
      {8, "universal formula and synthesized closed loop", universal_formula},
      {9, "simulate reproducibility", reproducibility},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << std::endl;
  }
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << criteria.size() - failures << "/" << criteria.size()
            << std::endl;
  return failures ? 1 : 0;
}
