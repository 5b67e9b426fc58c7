#include <iostream>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include "app.hpp"

int main(int argc, char** argv) {
  using namespace switchstab::app;

  CLI::App cli{"Stability checks, Monte Carlo validation and feedback synthesis for randomly switched systems"};
  cli.require_subcommand(1);

  std::string scenario;
  Options opt;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--trials", opt.trials, "Number of trajectories")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "Master seed");
    sub->add_option("--horizon", opt.horizon, "Simulation horizon")->check(CLI::PositiveNumber);
    sub->add_option("--step", opt.step, "RK4 step")->check(CLI::PositiveNumber);
    sub->add_option("--tail-start", opt.tail_start, "Start T* of the tail supremum")->check(CLI::NonNegativeNumber);
    sub->add_option("--eps", opt.eps, "Tail exceedance thresholds (repeatable)");
    sub->add_option("--out-dir", opt.out_dir, "Directory for summary.json and trajectories.csv");
    sub->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
  };

  auto* check = cli.add_subcommand("check", "Verify a certificate and evaluate the stability condition");
  check->add_option("scenario", scenario, "Scenario JSON file")->required();

  auto* simulate = cli.add_subcommand("simulate", "Run a trajectory ensemble and write statistics");
  simulate->add_option("scenario", scenario, "Scenario JSON file")->required();
  add_run_flags(simulate);
  simulate->add_option("--export-trajectory", opt.export_trajectory,
                       "Also write path_K.csv and trajectory_K.csv for trajectory K");

  auto* synthesize = cli.add_subcommand("synthesize", "Build a feedback law, verify it and simulate the closed loop");
  synthesize->add_option("scenario", scenario, "Scenario JSON file")->required();
  add_run_flags(synthesize);
  synthesize->add_option("--emit-controller", opt.emit_controller, "Write the controller JSON here and stop");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return kExitUsage;
  }

  if (check->parsed()) return run_check(scenario, std::cout, std::cerr);
  if (simulate->parsed()) return run_simulate(scenario, opt, std::cout, std::cerr);
  return run_synthesize(scenario, opt, std::cout, std::cerr);
}
