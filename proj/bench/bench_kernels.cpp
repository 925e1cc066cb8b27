#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pmam/examples.hpp"
#include "pmam/gig1.hpp"
#include "pmam/kernels.hpp"
#include "pmam/linalg.hpp"

using namespace pmam;

namespace {

DenseMatrix random_matrix(std::size_t n, std::uint64_t seed, double diagonal = 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = u(rng) + (i == j ? diagonal : 0.0);
    return m;
}

template <void (*Multiply)(const DenseMatrix&, const DenseMatrix&, DenseMatrix&)>
void BM_Multiply(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const DenseMatrix a = random_matrix(n, 1);
    const DenseMatrix b = random_matrix(n, 2);
    DenseMatrix c;
    for (auto _ : state) {
        Multiply(a, b, c);
        benchmark::DoNotOptimize(c.values().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <bool (*Factor)(DenseMatrix&, std::vector<std::size_t>&, double)>
void BM_LuFactor(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const DenseMatrix m = random_matrix(n, 3, 2.0);
    std::vector<std::size_t> perm;
    for (auto _ : state) {
        DenseMatrix lu = m;
        benchmark::DoNotOptimize(Factor(lu, perm, 1e-13));
    }
}

void BM_StructuredSolve(benchmark::State& state) {
    const BlockSequences model = examples::map_g1_negative();
    SolverConfig cfg;
    cfg.levels = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_gig1(model, cfg).residual_norm);
}

}  // namespace

BENCHMARK(BM_Multiply<kernels::multiply>)->Name("multiply/parallel")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_Multiply<kernels::serial::multiply>)->Name("multiply/serial")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_LuFactor<kernels::lu_factor>)->Name("lu_factor/parallel")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_LuFactor<kernels::serial::lu_factor>)->Name("lu_factor/serial")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_StructuredSolve)->Arg(30)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
