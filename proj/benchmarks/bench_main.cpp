#include <random>

#include <benchmark/benchmark.h>

#include "nettopo/detect.hpp"
#include "nettopo/dynamics.hpp"
#include "nettopo/estimate.hpp"
#include "nettopo/infer.hpp"
#include "nettopo/nnls.hpp"
#include "nettopo/topology.hpp"

using namespace nettopo;

namespace {

TopologyMatrix make_w(Index n) {
  return weight_laplacian(generate_random_digraph(n, 0.1, 7), 0.9);
}

void BM_Simulate(benchmark::State& state) {
  const Index n = state.range(0);
  const TopologyMatrix w = make_w(n);
  const Vector x0 = Vector::Ones(n);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(w, x0, 100, NoiseModel{}, ExcitationPlan{0, 50, 10.0, 1}, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_Simulate)->Arg(20)->Arg(100)->Arg(400);

void BM_ErfInv(benchmark::State& state) {
  double p = -0.999;
  for (auto _ : state) {
    benchmark::DoNotOptimize(erf_inv(p));
    p += 1e-4;
    if (p > 0.999) p = -0.999;
  }
}
BENCHMARK(BM_ErfInv);

void BM_Nnls(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Matrix a(n + 5, n);
  Vector b(n + 5);
  for (Index i = 0; i < a.rows(); ++i) {
    b(i) = g(rng);
    for (Index j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(solve_nnls(a, b));
}
BENCHMARK(BM_Nnls)->Arg(20)->Arg(100);

void BM_InferWithinH(benchmark::State& state) {
  const Index n = state.range(0);
  const TopologyMatrix w = make_w(n);
  const Trajectory traj =
      simulate(w, Vector::Zero(n), 60, NoiseModel{}, ExcitationPlan{0, 50, 50.0, 1}, 11);
  const auto floors = default_gamma_floors(0.4, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(infer_within_h(traj, 0, 50.0, floors, 3, w.stability()));
  }
}
BENCHMARK(BM_InferWithinH)->Arg(20)->Arg(200);

void BM_ConstrainedEstimate(benchmark::State& state) {
  const Index n = state.range(0);
  const TopologyMatrix w = make_w(n);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  Vector x0(n);
  for (Index i = 0; i < n; ++i) x0(i) = u(rng);
  const Trajectory traj = simulate(w, x0, n + 5, NoiseModel{}, std::nullopt, 5);
  LsProblem p;
  p.pairs = observation_pairs(traj, 1, n + 5);
  for (Index i = 0; i < n; ++i) p.constraints[{i, 0}] = w(i, 0) > 0 ? EntryConstraint::ForcedPositive : EntryConstraint::ForcedZero;
  for (auto _ : state) benchmark::DoNotOptimize(constrained_estimate(p));
}
BENCHMARK(BM_ConstrainedEstimate)->Arg(20)->Arg(60);

}  // namespace
BENCHMARK_MAIN();
