#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "switchstab/conditions.hpp"
#include "switchstab/export.hpp"
#include "switchstab/montecarlo.hpp"
#include "switchstab/scenario.hpp"
#include "switchstab/synthesis.hpp"

namespace switchstab::app {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxListedViolations = 20;

// A domain-level failure with a reason for the JSON output.
struct Refusal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<ScenarioFile> load(const std::filesystem::path& path, std::ostream& err) {
  try {
    return load_scenario(path);
  } catch (const ScenarioError& e) {
    err << "error: " << path.string() << ": " << e.what() << '\n';
    return std::nullopt;
  }
}

void apply_overrides(RunConfig& run, const Options& o) {
  if (o.trials) run.trials = *o.trials;
  if (o.seed) run.seed = *o.seed;
  if (o.horizon) run.horizon = *o.horizon;
  if (o.step) run.step = *o.step;
  if (o.tail_start) run.tail_start = *o.tail_start;
  if (!o.eps.empty()) run.epsilons = o.eps;
  if (run.trials == 0) throw std::invalid_argument("--trials must be at least 1");
  if (!(run.step > 0.0)) throw std::invalid_argument("--step must be positive");
  if (!(run.horizon > 0.0)) throw std::invalid_argument("--horizon must be positive");
  if (!(run.tail_start >= 0.0 && run.tail_start <= run.horizon))
    throw std::invalid_argument("--tail-start must lie in [0, horizon]");
  for (double e : run.epsilons)
    if (!(e > 0.0)) throw std::invalid_argument("--eps must be positive");
}

// Closed-loop ingredients: the controller, the family it acts on, and the
// certificate input with the controller's target rates filled in.
struct Plant {
  SubsystemFamily family;
  std::shared_ptr<const FeedbackLaw> controller;
  std::optional<CertificateInput> certificate;
  std::optional<ControllerSpec> spec;
};

Plant build_plant(const ScenarioFile& file) {
  Plant p{file.family, nullptr, file.certificate, file.controller};
  if (!file.controller) return p;
  ControllerSpec& spec = *p.spec;
  if (spec.kind == ControllerKind::Universal) {
    if (!p.certificate) throw Refusal("a universal controller needs a certificate section");
    if (spec.lambda.empty()) {
      if (!p.certificate->lambda) throw Refusal("universal controller: declare target rates (controller.lambda)");
      spec.lambda = *p.certificate->lambda;
    }
    p.controller = std::make_shared<UniversalController>(file.family, p.certificate->V, spec.lambda);
    // The closed loop is certified at the target rates.
    if (!p.certificate->lambda) p.certificate->lambda = spec.lambda;
  } else if (spec.kind == ControllerKind::LinearGain) {
    p.controller = std::make_shared<LinearGainController>(spec.gain);
  } else {
    p.controller = std::make_shared<PolynomialController>(spec.components);
  }
  p.family = file.family.closed_loop(p.controller);
  return p;
}

json violations_json(const std::vector<Violation>& v) {
  json list = json::array();
  for (std::size_t k = 0; k < std::min(v.size(), kMaxListedViolations); ++k) list.push_back(to_json(v[k]));
  return list;
}

struct CheckResult {
  json report;
  bool pass = false;
  std::optional<CertificateFamily> cert;
};

// Certificate resolution, pointwise verification and the class condition.
CheckResult check_certificate(const ScenarioFile& file, const Plant& plant) {
  CheckResult r;
  r.report["signal_class"] = to_string(file.law.signal_class());
  if (!plant.certificate) throw Refusal("the scenario has no certificate section");
  ResolvedCertificate resolved;
  try {
    resolved = resolve_certificate(*plant.certificate, plant.family);
  } catch (const std::invalid_argument& e) {
    throw Refusal(e.what());
  } catch (const std::domain_error& e) {
    throw Refusal(e.what());
  }
  const CertificateFamily& cert = resolved.cert;
  r.report["certificate"] = to_json(cert);
  r.report["certificate"]["extracted"] = resolved.extracted;

  const auto samples = default_samples(plant.family.dimension());
  const auto violations = verify_pointwise(plant.family, cert, samples);
  r.report["pointwise"] = {{"samples", samples.size()},
                           {"violations", violations.size()},
                           {"examples", violations_json(violations)}};
  if (file.law.signal_class() == SignalClass::GH && !cert.lambda_matrix)
    throw Refusal("GH switching needs the full lambda matrix (declare lambda_matrix or use linear fields)");
  const ConditionVerdict verdict = check_for_law(cert, file.law);
  r.report["verdict"] = to_json(verdict);
  r.pass = verdict.satisfied && violations.empty();
  if (verdict.inapplicable_reason) r.report["reason"] = *verdict.inapplicable_reason;
  else if (!violations.empty()) r.report["reason"] = "certificate inequalities violated at sampled points";
  else if (!verdict.satisfied) r.report["reason"] = "condition " + verdict.condition + " not satisfied";
  r.cert = cert;
  return r;
}

struct SimulationResult {
  json summary;
  std::string csv;
  bool pass = true;
};

SimulationResult simulate(const ScenarioFile& file, const Plant& plant, const std::optional<CertificateFamily>& cert,
                          const Options& options) {
  const RunConfig& run = file.run;
  Scenario scn{plant.family, file.law, cert, run.x0, run.horizon, run.step, nullptr};
  EnsembleOptions eo;
  eo.tail_start = run.tail_start;
  eo.report_points = run.report_points;
  eo.threads = options.threads;
  const EnsembleStats stats = run_ensemble(scn, run.trials, run.seed, eo);

  SimulationResult res;
  json& s = res.summary;
  s["ensemble"] = summary_json(stats);
  s["run"] = {{"trials", run.trials},          {"seed", run.seed},          {"horizon", json_number(run.horizon)},
              {"step", json_number(run.step)}, {"tail_start", json_number(run.tail_start)},
              {"x0", run.x0}};
  json gasp = json::array();
  for (double eps : run.epsilons) {
    json g = to_json(gasp_estimate(stats, eps, run.tail_start));
    g["eps"] = json_number(eps);
    g["t_star"] = json_number(run.tail_start);
    gasp.push_back(std::move(g));
  }
  s["gasp"] = std::move(gasp);
  s["decay_check"] = nullptr;
  s["mean_bound"] = nullptr;
  const bool checkable = cert && (file.law.signal_class() != SignalClass::GH || cert->lambda_matrix);
  if (checkable) {
    const ConditionVerdict verdict = check_for_law(*cert, file.law);
    s["verdict"] = to_json(verdict);
    if (verdict.satisfied) {
      const DecayReport decay = decay_check(stats, *cert, file.law, run.x0);
      s["decay_check"] = to_json(decay);
      res.pass = res.pass && decay.pass;
      if (file.law.signal_class() == SignalClass::UH) {
        const double bound = mean_bound_uh(*cert, file.law, norm2(run.x0));
        const double sup_mean_v = s["ensemble"]["sup_mean_v"].get<double>();
        s["mean_bound"] = {{"bound", json_number(bound)},
                           {"sup_mean_v", json_number(sup_mean_v)},
                           {"pass", sup_mean_v <= bound}};
        res.pass = res.pass && sup_mean_v <= bound;
      }
    }
  }
  if (options.export_trajectory) {
    const std::size_t k = *options.export_trajectory;
    if (k >= run.trials) throw std::invalid_argument("--export-trajectory index exceeds the trial count");
    const SwitchingPath path = sample_path(file.law, run.horizon, trajectory_seed(run.seed, k));
    IntegrationOptions io;
    io.step = run.step;
    const Trajectory traj = integrate(plant.family, path, run.x0, io);
    write_file_atomic(options.out_dir / ("path_" + std::to_string(k) + ".csv"), path_csv(path));
    write_file_atomic(options.out_dir / ("trajectory_" + std::to_string(k) + ".csv"), trajectory_csv(traj));
  }
  res.csv = trajectories_csv(stats);
  return res;
}

json header(const char* command, const ScenarioFile& file) {
  return {{"schema_version", kSchemaVersion}, {"command", command}, {"scenario", file.name}};
}

template <class Body>
int guarded(std::ostream& out, std::ostream& err, json& doc, Body&& body) {
  try {
    const int code = body();
    out << doc.dump(2) << '\n';
    return code;
  } catch (const Refusal& e) {
    doc["pass"] = false;
    doc["reason"] = e.what();
    out << doc.dump(2) << '\n';
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

int run_check(const std::filesystem::path& scenario, std::ostream& out, std::ostream& err) {
  const auto file = load(scenario, err);
  if (!file) return kExitUsage;
  json doc = header("check", *file);
  return guarded(out, err, doc, [&] {
    const Plant plant = build_plant(*file);
    doc["closed_loop"] = plant.controller != nullptr;
    CheckResult r = check_certificate(*file, plant);
    doc.update(r.report);
    doc["pass"] = r.pass;
    return r.pass ? kExitOk : kExitFailure;
  });
}

int run_simulate(const std::filesystem::path& scenario, const Options& options, std::ostream& out,
                 std::ostream& err) {
  auto file = load(scenario, err);
  if (!file) return kExitUsage;
  json doc = header("simulate", *file);
  return guarded(out, err, doc, [&] {
    apply_overrides(file->run, options);
    const Plant plant = build_plant(*file);
    std::optional<CertificateFamily> cert;
    if (plant.certificate) {
      try {
        cert = resolve_certificate(*plant.certificate, plant.family).cert;
      } catch (const std::invalid_argument& e) {
        throw Refusal(e.what());
      }
    }
    std::filesystem::create_directories(options.out_dir);
    SimulationResult sim = simulate(*file, plant, cert, options);
    doc.update(sim.summary);
    doc["pass"] = sim.pass;
    write_file_atomic(options.out_dir / "summary.json", doc.dump(2) + "\n");
    write_file_atomic(options.out_dir / "trajectories.csv", sim.csv);
    return sim.pass ? kExitOk : kExitFailure;
  });
}

int run_synthesize(const std::filesystem::path& scenario, const Options& options, std::ostream& out,
                   std::ostream& err) {
  auto file = load(scenario, err);
  if (!file) return kExitUsage;
  json doc = header("synthesize", *file);
  return guarded(out, err, doc, [&] {
    apply_overrides(file->run, options);
    if (!file->family.has_control()) throw Refusal("the system has no control fields");
    if (!file->certificate) throw Refusal("synthesis needs a certificate section with V_i");
    if (!file->controller) file->controller = ControllerSpec{};
    const Plant plant = build_plant(*file);
    const ControllerSpec& spec = *plant.spec;

    // Controller description; V_i and target rates fully determine the law.
    CertificateFamily targets;
    targets.V = plant.certificate->V;
    targets.lambda = spec.lambda.empty() ? plant.certificate->lambda : std::optional<Vector>(spec.lambda);
    targets.mu = plant.certificate->mu.value_or(targets.mu);
    json controller = controller_json(spec, targets);
    doc["controller"] = controller;
    if (options.emit_controller) {
      write_file_atomic(*options.emit_controller, controller.dump(2) + "\n");
      doc["pass"] = true;
      return kExitOk;
    }
    if (!targets.lambda) throw Refusal("declare target rates (certificate.lambda or controller.lambda)");

    const auto samples = default_samples(file->family.dimension());
    bool pass = true;
    json clf = json::array();
    if (spec.kind == ControllerKind::Universal) {
      for (Mode i = 0; i < file->family.modes(); ++i)
        for (const auto& v : verify_clf_condition(file->family, targets, i, samples)) {
          if (clf.size() < kMaxListedViolations)
            clf.push_back({{"mode", i + 1},
                           {"x", v.x},
                           {"w_bar", json_number(v.w_bar)},
                           {"w_tilde", json_number(v.w_tilde)}});
          pass = false;
        }
    }
    doc["clf_violations"] = clf;
    json decrease = json::array();
    for (const auto& v : verify_closed_loop_decrease(file->family, targets, plant.controller, samples)) {
      if (decrease.size() < kMaxListedViolations)
        decrease.push_back({{"mode", v.mode + 1}, {"x", v.x}, {"residual", json_number(v.residual)}});
      pass = false;
    }
    doc["decrease_violations"] = decrease;
    if (!pass) {
      doc["pass"] = false;
      doc["reason"] = "control Lyapunov conditions violated at sampled points";
      return kExitFailure;
    }

    CheckResult check = check_certificate(*file, plant);
    doc["check"] = check.report;
    if (!check.pass) {
      doc["pass"] = false;
      return kExitFailure;
    }
    std::filesystem::create_directories(options.out_dir);
    SimulationResult sim = simulate(*file, plant, check.cert, options);
    doc["simulation"] = sim.summary;
    doc["pass"] = sim.pass;
    write_file_atomic(options.out_dir / "controller.json", controller.dump(2) + "\n");
    write_file_atomic(options.out_dir / "summary.json", doc.dump(2) + "\n");
    write_file_atomic(options.out_dir / "trajectories.csv", sim.csv);
    return sim.pass ? kExitOk : kExitFailure;
  });
}

}  // namespace switchstab::app
