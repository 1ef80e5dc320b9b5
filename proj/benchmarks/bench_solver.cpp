#include <benchmark/benchmark.h>

#include "rmtcov/stieltjes.hpp"
#include "rmtcov/support.hpp"

using namespace rmtcov;

namespace {

PopulationSpectrum fig1(std::size_t M, std::size_t N) {
    return PopulationSpectrum::from_weights(
        {{1.0, 0.2}, {3.0, 0.4}, {10.0, 0.4}}, M, N);
}

void BM_SolveStieltjes(benchmark::State& state) {
    PopulationSpectrum spec = fig1(static_cast<std::size_t>(state.range(0)),
                                   2 * static_cast<std::size_t>(state.range(0)));
    Complex z(5.0, 0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_stieltjes(spec, z));
    }
}
BENCHMARK(BM_SolveStieltjes)->Arg(100)->Arg(1000)->Arg(10000);

void BM_BoundaryStieltjes(benchmark::State& state) {
    PopulationSpectrum spec = fig1(500, 1000);
    double E = 0.5 + 0.01 * static_cast<double>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(boundary_stieltjes(spec, E));
    }
}
BENCHMARK(BM_BoundaryStieltjes)->Arg(1)->Arg(400);

void BM_FindSupport(benchmark::State& state) {
    PopulationSpectrum spec = fig1(static_cast<std::size_t>(state.range(0)),
                                   2 * static_cast<std::size_t>(state.range(0)));
    SupportOptions opts;
    opts.with_classical_locations = false;
    for (auto _ : state) {
        benchmark::DoNotOptimize(find_support(spec, opts));
    }
}
BENCHMARK(BM_FindSupport)->Arg(100)->Arg(1000);

void BM_ClassicalLocations(benchmark::State& state) {
    PopulationSpectrum spec = fig1(static_cast<std::size_t>(state.range(0)),
                                   2 * static_cast<std::size_t>(state.range(0)));
    SupportOptions opts;
    opts.with_classical_locations = false;
    SupportStructure sup = find_support(spec, opts);
    for (auto _ : state) {
        benchmark::DoNotOptimize(classical_locations(spec, sup, opts));
    }
}
BENCHMARK(BM_ClassicalLocations)->Arg(50)->Arg(200);

}  // namespace
