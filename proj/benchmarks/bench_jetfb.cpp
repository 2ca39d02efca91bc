#include <benchmark/benchmark.h>

#include <random>

#include "jetfb/asymptotics.hpp"
#include "jetfb/energy.hpp"
#include "jetfb/solver.hpp"

using namespace jetfb;

namespace {

upstream_flow canonical_flow() { return upstream_flow(gas_law(2.0), upstream_profile::constant(2.0, 1.0), 4.0); }

domain_options canonical_domain(double h) {
  domain_options o;
  o.mu = 4.0;
  o.r = 8.0;
  o.h = h;
  return o;
}

void density_from_momentum(benchmark::State& state) {
  const gas_law gas(2.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> ts(1024);
  const double tc = gas.critical_momentum_sq(2.5);
  for (double& t : ts) t = 0.999 * tc * unit(rng);
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gas.density_from_momentum(ts[k++ & 1023], 2.5));
}
BENCHMARK(density_from_momentum);

void truncated_eval(benchmark::State& state) {
  const upstream_flow flow = canonical_flow();
  const truncated_law law(flow, 0.1);
  const auto s = law.state(2.0);
  double t = 0.0;
  for (auto _ : state) {
    t = t > 1.2 * s.tc ? 0.0 : t + 1e-3;
    benchmark::DoNotOptimize(law.eval(t, s));
  }
}
BENCHMARK(truncated_eval);

void energy_gradient(benchmark::State& state) {
  const jet_problem p(canonical_flow(), 0.1, nozzle::logarithmic(2.0), canonical_domain(1.0 / state.range(0)));
  discrete_energy e(p.grid(), p.law());
  const boundary_values bv = boundary_data(p.grid(), p.flow(), 8.0);
  e.set_boundary(bv);
  e.set_indicator(p.law().lambda(8.0, true), 8.0 * 8.0 / state.range(0));
  const auto x = e.gather(initial_blend(p, bv));
  std::vector<double> grad;
  for (auto _ : state) benchmark::DoNotOptimize(e.gradient(x, grad));
  state.counters["unknowns"] = static_cast<double>(x.size());
}
BENCHMARK(energy_gradient)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void fixed_lambda_solve(benchmark::State& state) {
  domain_options o = canonical_domain(1.0 / 32.0);
  o.k_mu = 0.15;
  const jet_problem p(canonical_flow(), 0.1, nozzle::logarithmic(2.0), o);
  solver_config cfg;
  cfg.enforce_invariants = false;
  for (auto _ : state) benchmark::DoNotOptimize(solve_fixed_lambda(p, 8.0, cfg).energy);
}
BENCHMARK(fixed_lambda_solve)->Unit(benchmark::kSecond)->Iterations(1);

void downstream_state_build(benchmark::State& state) {
  const upstream_flow flow(gas_law(2.0), upstream_profile::power(2.0, 1.0, 0.25, 2.0), 48.0);
  for (auto _ : state) benchmark::DoNotOptimize(downstream_state(flow, 40.0).h_d());
}
BENCHMARK(downstream_state_build)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
