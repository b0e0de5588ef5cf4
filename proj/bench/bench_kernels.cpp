// Serial vs OpenMP subdomain kernels. Argument 0 = serial, 1 = parallel.
#include "fetilab/bdd.hpp"
#include "fetilab/feti.hpp"

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

using namespace fetilab;

namespace {

/// 3D elasticity, 3x3x2 subdomains of 4x4x4 elements, checkerboard contrast.
const DecomposedProblem& problem() {
  static const DecomposedProblem p = [] {
    ProblemSpec spec;
    spec.grid.dimension = 3;
    spec.grid.subdomains = {3, 3, 2};
    spec.grid.elements = {12, 12, 8};
    spec.physics = Physics::elasticity;
    spec.material.pattern = MaterialPattern::checkerboard;
    spec.material.e2 = 1e3;
    return build_problem(spec);
  }();
  return p;
}

const std::vector<SubdomainOperators>& operators() {
  static const auto ops = build_subdomain_operators(problem(), Execution::serial);
  return ops;
}

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

Vec random_vec(Eigen::Index n) {
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  Vec v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

void BM_build_operators(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_subdomain_operators(problem(), mode(state)));
}

void BM_apply_F(benchmark::State& state) {
  const auto forces = split_forces(SplitKind::raw, problem(), operators());
  const DualInterfaceSystem dual(problem(), operators(), forces, mode(state));
  const Vec x = random_vec(dual.num_multipliers());
  for (auto _ : state) benchmark::DoNotOptimize(dual.apply_F(x));
}

void BM_dirichlet_preconditioner(benchmark::State& state) {
  const Preconditioner pre(problem(), operators(), PreconditionerKind::dirichlet, ScalingKind::stiffness, mode(state));
  const Vec x = random_vec(problem().num_multipliers());
  for (auto _ : state) benchmark::DoNotOptimize(pre.apply(x));
}

void BM_apply_S(benchmark::State& state) {
  const PrimalInterfaceSystem sys(problem(), operators(), mode(state));
  const Vec x = random_vec(sys.size());
  for (auto _ : state) benchmark::DoNotOptimize(sys.apply_S(x));
}

void BM_neumann_neumann(benchmark::State& state) {
  const PrimalInterfaceSystem sys(problem(), operators(), mode(state));
  const NeumannNeumann nn(sys, problem(), operators(), mode(state));
  const Vec x = random_vec(sys.size());
  for (auto _ : state) benchmark::DoNotOptimize(nn.apply(x));
}

void BM_solve_feti(benchmark::State& state) {
  FetiOptions o;
  o.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(solve_feti(problem(), operators(), o));
}

void BM_solve_bdd(benchmark::State& state) {
  BddOptions o;
  o.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(solve_bdd(problem(), operators(), o));
}

}  // namespace

BENCHMARK(BM_build_operators)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_apply_F)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_dirichlet_preconditioner)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_apply_S)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_neumann_neumann)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_solve_feti)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_solve_bdd)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
