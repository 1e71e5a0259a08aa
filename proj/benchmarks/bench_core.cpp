// Micro benchmarks for the hot paths of the simulation loop: geometry
// assembly, extrapolation-point Bellman errors, full network flow
// evaluations, and integrator steps.

#include <benchmark/benchmark.h>

#include "graphgame/scenario.hpp"
#include "graphgame/sg_filter.hpp"
#include "graphgame/sim.hpp"

namespace {

using namespace graphgame;

const SimConfig& cfg() {
  static const SimConfig c = example_1d_config();
  return c;
}

NetworkWeights initial_weights(const SimConfig& c) {
  NetworkWeights w;
  for (const auto& a : c.agents) {
    w.theta.push_back(a.theta0);
    w.w_c.push_back(a.w_c0);
    w.w_a.push_back(a.w_a0);
  }
  return w;
}

void BM_subgraph_geometry(benchmark::State& state) {
  const auto sys = build_system(cfg());
  const SubgraphPlant& plant = sys->plant(4);
  std::vector<Vector> states(3, Vector::Constant(1, 1.3));
  const Vector x0 = Vector::Constant(1, 0.8);
  for (auto _ : state)
    benchmark::DoNotOptimize(plant.geometry(states, x0));
}
BENCHMARK(BM_subgraph_geometry);

void BM_grid_point_bellman(benchmark::State& state) {
  const auto sys = build_system(cfg());
  Vector point(4);
  point << 0.5, -0.5, 0.5, 1.0;
  const GameEval eval(*sys, 4, point);
  const NetworkWeights w = initial_weights(cfg());
  Vector omega(sys->value_bases[4].size());
  double delta = 0.0;
  for (auto _ : state) {
    eval.bellman(4, w, omega, delta);
    benchmark::DoNotOptimize(delta);
  }
}
BENCHMARK(BM_grid_point_bellman);

void BM_network_flow(benchmark::State& state) {
  Simulator sim(cfg());
  const Vector y = sim.initial_state();
  for (auto _ : state)
    benchmark::DoNotOptimize(sim.network_flow(0.0, y));
}
BENCHMARK(BM_network_flow);

void BM_rk4_step(benchmark::State& state) {
  Simulator sim(cfg());
  const Vector y = sim.initial_state();
  for (auto _ : state)
    benchmark::DoNotOptimize(sim.rk4_step(0.0, y));
}
BENCHMARK(BM_rk4_step);

void BM_sg_derivative(benchmark::State& state) {
  std::vector<double> xs(9);
  for (int k = 0; k < 9; ++k) xs[k] = std::sin(0.01 * k);
  for (auto _ : state)
    benchmark::DoNotOptimize(sg_derivative(xs, 0.01));
}
BENCHMARK(BM_sg_derivative);

}  // namespace

BENCHMARK_MAIN();
