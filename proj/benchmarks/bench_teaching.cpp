#include <benchmark/benchmark.h>

#include "kteach/comm.hpp"
#include "kteach/patterns.hpp"
#include "kteach/rng.hpp"
#include "kteach/synthetic.hpp"
#include "kteach/teaching.hpp"

using namespace kteach;

namespace {

VectorValuedFunction random_vf(const GridPtr& grid, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<SampledFunction> comps;
    for (std::size_t i = 0; i < d; ++i) {
        std::vector<double> v(grid->size());
        for (double& x : v) x = rng.next_double();
        comps.emplace_back(grid, std::move(v));
    }
    return VectorValuedFunction(std::move(comps));
}

}  // namespace

static void BM_KernelEval(benchmark::State& state) {
    const KernelSpec spec;
    const Point a = Point::d2(0.25, 0.5);
    const Point b = Point::d2(0.75, 0.125);
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernel_eval(spec, a, b));
    }
}
BENCHMARK(BM_KernelEval);

static void BM_ApplyAtom(benchmark::State& state) {
    const auto grid = Grid::pixel_lattice(state.range(), state.range());
    const auto f = SampledFunction::zeros(grid);
    const KernelSpec spec(2.0 / static_cast<double>(state.range()));
    const KernelAtom atom{0, grid->point(grid->size() / 2), 1.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(apply_atom(f, atom, spec, 0.1));
    }
    state.SetComplexityN(state.range());
}
BENCHMARK(BM_ApplyAtom)->RangeMultiplier(2)->Range(16, 128)->Complexity();

static void BM_GftSelect(benchmark::State& state) {
    const auto grid = Grid::pixel_lattice(state.range(), state.range());
    const auto vf = random_vf(grid, 3, 1);
    const auto target = random_vf(grid, 3, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(select_gft(vf, target));
    }
    state.SetComplexityN(state.range());
}
BENCHMARK(BM_GftSelect)->RangeMultiplier(2)->Range(16, 128)->Complexity();

static void BM_Disagreement(benchmark::State& state) {
    const auto grid = Grid::pixel_lattice(64, 64);
    const auto vf = random_vf(grid, 3, 1);
    const auto target = random_vf(grid, 3, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(disagreement(vf, target));
    }
}
BENCHMARK(BM_Disagreement);

static void BM_SolveCommMatrix(benchmark::State& state) {
    const auto grid = Grid::pixel_lattice(32, 32);
    const auto vf = random_vf(grid, state.range(), 1);
    const auto target = random_vf(grid, state.range(), 2);
    const CommPolicy policy;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_comm_matrix(vf, target, policy));
    }
}
BENCHMARK(BM_SolveCommMatrix)->Arg(2)->Arg(4)->Arg(16);

static void BM_TeachIteration(benchmark::State& state) {
    const auto grid = Grid::linspace_1d(-10.0, 10.0, 256);
    const VectorValuedFunction target(
        {synth_target(SyntheticSpec::gaussian(0.0, 5.0), grid)});
    const VectorValuedFunction init({SampledFunction::zeros(grid)});
    TeachingConfig tc;
    tc.etas = StepSizes::uniform(1, 0.1);
    tc.epsilon = 1e-12;
    for (auto _ : state) {
        tc.max_iterations = 64;
        benchmark::DoNotOptimize(run_teaching(tc, target, init, Strategy::Gft, CommPolicy{}));
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_TeachIteration);

BENCHMARK_MAIN();
