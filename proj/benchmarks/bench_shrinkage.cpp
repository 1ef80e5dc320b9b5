#include <benchmark/benchmark.h>

#include "rmtcov/sample.hpp"
#include "rmtcov/shrinkage.hpp"
#include "rmtcov/simulation.hpp"

using namespace rmtcov;

namespace {

SampleDecomposition make_decomp(std::size_t M, std::size_t N) {
    PopulationSpectrum spec = PopulationSpectrum::from_weights(
        {{1.0, 0.2}, {3.0, 0.4}, {10.0, 0.4}}, M, N);
    Eigen::MatrixXd Y = generate_sample(spec, N, EntryDistribution::Gaussian, 1);
    return SampleDecomposition::from_data(Y);
}

void BM_ShrinkFrobenius(benchmark::State& state) {
    const std::size_t M = static_cast<std::size_t>(state.range(0));
    SampleDecomposition decomp = make_decomp(M, 2 * M);
    const double eta = default_eta(2 * M);
    for (auto _ : state) {
        benchmark::DoNotOptimize(shrink_frobenius(decomp, eta));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ShrinkFrobenius)->Arg(250)->Arg(500)->Arg(1000)->Complexity();

void BM_SampleDecomposition(benchmark::State& state) {
    const std::size_t M = static_cast<std::size_t>(state.range(0));
    PopulationSpectrum spec = PopulationSpectrum::from_weights(
        {{1.0, 0.2}, {3.0, 0.4}, {10.0, 0.4}}, M, 2 * M);
    Eigen::MatrixXd Y = generate_sample(spec, 2 * M, EntryDistribution::Gaussian, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(SampleDecomposition::from_data(Y));
    }
}
BENCHMARK(BM_SampleDecomposition)->Arg(250)->Arg(500);

void BM_AssembleEstimator(benchmark::State& state) {
    const std::size_t M = static_cast<std::size_t>(state.range(0));
    SampleDecomposition decomp = make_decomp(M, 2 * M);
    ShrinkageResult r = shrink_frobenius(decomp, default_eta(2 * M));
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_estimator(decomp, r));
    }
}
BENCHMARK(BM_AssembleEstimator)->Arg(250)->Arg(500);

}  // namespace
