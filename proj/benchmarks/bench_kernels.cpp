#include <benchmark/benchmark.h>

#include "rmtcov/block_matrix.hpp"
#include "rmtcov/kernels.hpp"
#include "rmtcov/rng.hpp"
#include "rmtcov/support.hpp"

using namespace rmtcov;

namespace {

struct Fixture {
    PopulationSpectrum spectrum;
    SupportStructure support;
    KernelContext ctx;
    BlockObservable A;

    static Fixture make(Eigen::Index n) {
        Rng rng(9);
        std::vector<double> sigma(static_cast<std::size_t>(n));
        for (auto& s : sigma) s = 0.5 + 2.0 * rng.next_double();
        PopulationSpectrum spec(sigma, static_cast<std::size_t>(n));
        SupportOptions opts;
        opts.with_classical_locations = false;
        opts.with_bulk_counts = false;
        SupportStructure sup = find_support(spec, opts);
        KernelContext ctx = KernelContext::make(
            spec, sup, {Complex(1.5, 0.3), Complex(1.2, 0.25), Complex(1.0, 0.4)});
        Eigen::MatrixXcd raw(2 * n, 2 * n);
        for (Eigen::Index i = 0; i < 2 * n; ++i)
            for (Eigen::Index j = 0; j < 2 * n; ++j)
                raw(i, j) = Complex(rng.next_gaussian(), rng.next_gaussian());
        BlockObservable A{raw, n, n};
        return {std::move(spec), std::move(sup), std::move(ctx), std::move(A)};
    }
};

void BM_ApplyX12(benchmark::State& state) {
    Fixture f = Fixture::make(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(apply_X12(f.ctx, f.A));
    }
}
BENCHMARK(BM_ApplyX12)->Arg(50)->Arg(150);

void BM_Pi123(benchmark::State& state) {
    Fixture f = Fixture::make(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pi_123(f.ctx, f.A, f.A));
    }
}
BENCHMARK(BM_Pi123)->Arg(50)->Arg(150);

void BM_IsRegular(benchmark::State& state) {
    Fixture f = Fixture::make(state.range(0));
    BlockObservable reg = one_point_regularize(f.ctx, 1, f.A).regularized;
    for (auto _ : state) {
        benchmark::DoNotOptimize(is_regular(f.ctx, reg, 10.0));
    }
}
BENCHMARK(BM_IsRegular)->Arg(50)->Arg(150);

}  // namespace
