#include <benchmark/benchmark.h>

#include "pstab/delay.hpp"
#include "pstab/rng.hpp"
#include "pstab/sim.hpp"
#include "pstab/spectral.hpp"
#include "pstab/stability.hpp"
#include "pstab/systems.hpp"

using namespace pstab;

namespace {

DenseMatrix random_nonnegative(std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed);
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.uniform();
    return m;
}

SwitchedSystem two_map_family(double w0, double w1) {
    MapSpec f(DenseMatrix(2, 2), DenseMatrix{{0.5, 1.0}, {0.0, 0.5}}, {0.0, 0.0});
    MapSpec g(DenseMatrix(2, 2), DenseMatrix{{0.5, 0.0}, {1.0, 0.5}}, {0.0, 0.0});
    return SwitchedSystem({f, g}, {w0, w1});
}

void BM_spectral_radius(benchmark::State& state) {
    const DenseMatrix m = random_nonnegative(static_cast<std::size_t>(state.range(0)), 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(spectral_radius_value(m));
    }
}
BENCHMARK(BM_spectral_radius)->Arg(4)->Arg(16)->Arg(64);

void BM_companion_radius(benchmark::State& state) {
    const std::size_t n = 4;
    const unsigned bound = static_cast<unsigned>(state.range(0));
    CounterRng rng(11);
    std::vector<unsigned> lags(n * n);
    for (unsigned& l : lags) l = static_cast<unsigned>(rng.uniform_uint(bound));
    const DenseMatrix big =
        embed_matrix(random_nonnegative(n, 13), DelayMatrix(n, bound, lags), bound);
    for (auto _ : state) {
        benchmark::DoNotOptimize(spectral_radius_value(big));
    }
}
BENCHMARK(BM_companion_radius)->Arg(2)->Arg(8)->Arg(32);

void BM_kron_power(benchmark::State& state) {
    const DenseMatrix m = random_nonnegative(3, 17);
    const unsigned p = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(kron_power(m, p));
    }
}
BENCHMARK(BM_kron_power)->Arg(2)->Arg(3)->Arg(4);

void BM_p_radius(benchmark::State& state) {
    const SwitchedSystem sys = two_map_family(0.9, 0.1);
    const LipschitzSet ls = lipschitz_set(sys);
    const unsigned p = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(p_radius(ls, p));
    }
}
BENCHMARK(BM_p_radius)->Arg(1)->Arg(2)->Arg(3);

void BM_simulate_switched(benchmark::State& state) {
    const SwitchedSystem sys = two_map_family(0.9, 0.1);
    const std::vector<double> x0{1.0, 0.0};
    const std::size_t traj = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(sys, x0, 300, traj, 42));
    }
}
BENCHMARK(BM_simulate_switched)->Arg(10)->Arg(100);

void BM_simulate_delayed(benchmark::State& state) {
    const DelayedSwitchedSystem delayed = delayed_system(
        two_map_family(0.9, 0.1), DelayPolicy::iid_uniform_entries(),
        static_cast<unsigned>(state.range(0)));
    const std::vector<double> x0{1.0, 0.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(delayed, x0, 300, 100, 42));
    }
}
BENCHMARK(BM_simulate_delayed)->Arg(1)->Arg(5);

void BM_expected_delayed_lipschitz(benchmark::State& state) {
    const LipschitzSet ls = lipschitz_set(two_map_family(0.9, 0.1));
    const unsigned bound = static_cast<unsigned>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            expected_delayed_lipschitz(ls, DelayPolicy::iid_uniform_entries(), bound));
    }
}
BENCHMARK(BM_expected_delayed_lipschitz)->Arg(4)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
