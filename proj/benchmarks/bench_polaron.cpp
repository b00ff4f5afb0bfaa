#include <benchmark/benchmark.h>

#include "qthermo/polaron.hpp"

using namespace qthermo;

namespace {

void BM_PolaronSolve(benchmark::State& st) {
    SensorParams p;
    p.epsilon = 2.0;
    p.theta = 2.0 * kPi / 3.0;
    const BathSpec b{static_cast<double>(st.range(0)) / 10.0, 0.8, 0.95};
    polaron::SolveOptions opts;
    opts.scan_alternatives = false;
    for (auto _ : st) benchmark::DoNotOptimize(polaron::solve_selfconsistent(p, b, opts));
}
BENCHMARK(BM_PolaronSolve)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_EtaIntegral(benchmark::State& st) {
    SensorParams p;
    p.epsilon = 2.0;
    p.theta = 2.0 * kPi / 3.0;
    const BathSpec b{0.3, 0.8, 0.95};
    const RotatedParams rp = rotate_params(p);
    auto grid = std::make_shared<const quad::FixedGrid>(polaron::make_grid(b, p.rabi_frequency()));
    const auto table = polaron::tabulate_frak_s(grid, 0.8, 1.8, rp, b.beta);
    for (auto _ : st) benchmark::DoNotOptimize(polaron::eta_integral(b, table));
}
BENCHMARK(BM_EtaIntegral);

}  // namespace
