#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "strategem/agent.hpp"
#include "strategem/improvement.hpp"
#include "strategem/incentive_design.hpp"
#include "strategem/rng.hpp"
#include "strategem/scm.hpp"

using namespace strategem;

namespace {

// Linear chain x0 -> x1 -> ... with unit weights and gaussian noise.
Scm make_chain(int n) {
  std::vector<std::string> names;
  std::vector<Edge> edges;
  Scm scm;
  for (int i = 0; i < n; ++i) {
    names.push_back("x" + std::to_string(i));
    if (i == 0) {
      scm.equations.push_back(ConstantFn{0.0});
    } else {
      scm.equations.push_back(LinearFn{0.0, {{i - 1, 1.0}}});
      edges.push_back({i - 1, i});
    }
    scm.noises.push_back(NoiseSpec::gaussian(0.0, 1.0));
    scm.composition.push_back(NoiseComposition::Additive);
  }
  scm.dag = CausalDag(std::move(names), std::move(edges));
  scm.support_bound = 4.0 * static_cast<double>(n);
  return scm;
}

Scm make_random(int n, std::uint64_t seed) {
  RandomAnmSpec spec;
  spec.n_nodes = n;
  spec.seed = seed;
  return random_anm(spec);
}

void BM_forward_eval(benchmark::State& state) {
  Scm scm = make_chain(static_cast<int>(state.range(0)));
  std::vector<double> noise(static_cast<size_t>(scm.node_count()), 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_eval(scm, noise));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_forward_eval)->Arg(4)->Arg(16)->Arg(64);

void BM_sample(benchmark::State& state) {
  Scm scm = make_random(6, 11);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample(scm, state.range(0), ++seed));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_sample)->Arg(256)->Arg(2048);

void BM_closed_form_response(benchmark::State& state) {
  QuadraticCost cost({2.0, -0.4, 0.1, -0.4, 1.5, 0.0, 0.1, 0.0, 1.1}, 3);
  LinearScoreClassifier cls(3, {{0, 0.7}, {1, -0.3}, {2, 0.5}}, 1.0, 1e9);
  ActionSet actions = ActionSet::full_space(3);
  std::vector<double> x{0.2, -0.1, 0.4};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        best_response(cls, cost, x, actions, ClosedFormSolver{}));
  }
}
BENCHMARK(BM_closed_form_response);

void BM_grid_response(benchmark::State& state) {
  QuadraticCost cost({2.0, -0.4, -0.4, 1.5}, 2);
  LinearScoreClassifier cls(2, {{0, 0.7}, {1, -0.3}}, 1.0, 1e9);
  ActionSet actions = ActionSet::full_space(2);
  std::vector<double> x{0.2, -0.1};
  GridSolver gs;
  gs.resolution = 0.05;
  gs.radius = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(best_response(cls, cost, x, actions, Solver{gs}));
  }
}
BENCHMARK(BM_grid_response);

void BM_population_improvement(benchmark::State& state) {
  Scm scm = make_chain(3);
  FeatureSpace features = FeatureSpace::all_except(scm, 2);
  LinearScoreClassifier cls(2, {{1, 1.0}}, 0.0, 1e9);
  QuadraticCost cost({1.0, 0.0, 0.0, 1.0}, 2);
  ActionSet actions = ActionSet::full_space(2);
  McConfig mc;
  mc.n_outer = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(population_improvement(
        scm, 2, cls, cost, features, actions, ClosedFormSolver{}, mc));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_population_improvement)->Arg(256)->Arg(2048);

void BM_orient_edges(benchmark::State& state) {
  Scm truth = make_random(static_cast<int>(state.range(0)), 29);
  Skeleton skeleton = skeleton_of(truth.dag);
  ControlGrid grid;
  grid.n_candidates = 16;
  grid.mesh_size = 16;
  grid.cells_per_dim = 8;
  grid.mc.n_outer = 256;
  for (auto _ : state) {
    benchmark::DoNotOptimize(orient_edges(skeleton, truth, 0.5, grid));
  }
}
BENCHMARK(BM_orient_edges)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
