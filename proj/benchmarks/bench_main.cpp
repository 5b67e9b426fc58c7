#include <benchmark/benchmark.h>

#include "switchstab/conditions.hpp"
#include "switchstab/dynamics.hpp"
#include "switchstab/montecarlo.hpp"
#include "switchstab/synthesis.hpp"

using namespace switchstab;

namespace {

SubsystemFamily two_mode() {
  return SubsystemFamily({VectorField::linear(Matrix{{-1.0}}), VectorField::linear(Matrix{{1.0}})});
}

void BM_CheckEh(benchmark::State& state) {
  const Vector lam{2.0, -2.0}, q{0.8, 0.2};
  for (auto _ : state) benchmark::DoNotOptimize(check_eh(lam, 1.01, q, 6.0));
}
BENCHMARK(BM_CheckEh);

void BM_CheckGhUniform(benchmark::State& state) {
  const Matrix lam{{2.0, 0.5}, {2.0, 0.5}};
  const Matrix p{{0.2, 0.8}, {0.6, 0.4}};
  const auto hold = HoldingDistribution::uniform(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(check_gh(lam, 1.01, p, hold));
}
BENCHMARK(BM_CheckGhUniform);

// Fixed-step RK4 over a path with `range(0)` dimensions.
void BM_Rk4Linear(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = -1.0;
    if (i + 1 < n) a(i, i + 1) = 0.5;
  }
  const SubsystemFamily fam({VectorField::linear(a)});
  const SwitchingPath path{{0.0}, {0}, 10.0};
  const Vector x0(n, 1.0);
  IntegrationOptions opt;
  opt.step = 1e-3;
  for (auto _ : state) {
    double last = 0.0;
    integrate_observed(fam, path, x0, opt, [&](const GridPoint& p) { last = p.x[0]; });
    benchmark::DoNotOptimize(last);
  }
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_Rk4Linear)->Arg(1)->Arg(4)->Arg(16);

void BM_EnsembleEh(benchmark::State& state) {
  const SubsystemFamily fam = two_mode();
  const CertificateFamily cert =
      certify_linear({LyapunovSpec::quadratic(Matrix{{1.0}}), LyapunovSpec::quadratic(Matrix{{1.0}})}, fam, 1.01);
  const Scenario scn{fam, SwitchingLaw::eh(6.0, {0.8, 0.2}, 0), cert, Vector{1.0}, 20.0, 1e-3, nullptr};
  EnsembleOptions opt;
  opt.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(scn, 100, 1, opt));
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_EnsembleEh)->Unit(benchmark::kMillisecond);

void BM_UniversalControl(benchmark::State& state) {
  const SubsystemFamily fam({VectorField::linear(Matrix{{0.5, 1.0}, {-1.0, 0.2}})},
                            {{VectorField::linear(Matrix::identity(2))}});
  const UniversalController k(fam, {LyapunovSpec::quadratic(Matrix{{2.0, 0.3}, {0.3, 1.0}})}, Vector{1.0});
  const Vector x{0.3, -0.7};
  double u = 0.0;
  for (auto _ : state) {
    k.control(0, x, std::span<double>(&u, 1));
    benchmark::DoNotOptimize(u);
  }
}
BENCHMARK(BM_UniversalControl);

}  // namespace

BENCHMARK_MAIN();
