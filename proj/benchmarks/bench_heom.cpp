#include <benchmark/benchmark.h>

#include "qthermo/bornmarkov.hpp"
#include "qthermo/heom.hpp"
#include "qthermo/workflows.hpp"

using namespace qthermo;

namespace {

void BM_HierarchyRhs(benchmark::State& st) {
    SensorParams p;
    p.epsilon = 0.5;
    p.theta = 1.0;
    const int k = static_cast<int>(st.range(0));
    const int depth = static_cast<int>(st.range(1));
    const auto problem = make_heom_problem(p, BathSpec{0.2, 0.8, 0.95}, k, true);
    auto state = heom::build_hierarchy(problem.series, depth, build_initial_state(p));
    for (std::size_t i = 1; i < state.aux.size(); ++i) state.aux[i] = 1e-3 * state.aux[0];
    std::vector<QubitMatrix> d(state.aux.size());
    for (auto _ : st) {
        heom::hierarchy_rhs(*state.layout, problem, state.aux, d, static_cast<int>(st.range(2)));
        benchmark::DoNotOptimize(d.data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<long>(state.aux.size()));
    st.counters["n_aux"] = static_cast<double>(state.aux.size());
}
BENCHMARK(BM_HierarchyRhs)->Args({1, 6, 1})->Args({3, 6, 1})->Args({3, 8, 1})->Args({8, 5, 1})->Args({8, 5, 2});

void BM_HierarchyPropagate(benchmark::State& st) {
    SensorParams p;
    p.epsilon = 0.5;
    HeomSettings s;
    s.k_max = 1;
    s.depth = static_cast<int>(st.range(0));
    s.dt = 0.01;
    s.tail_correction = true;
    s.self_check = false;
    for (auto _ : st) benchmark::DoNotOptimize(heom_dynamics(p, BathSpec{0.06, 0.5, 0.25}, s, 10.0, 100));
}
BENCHMARK(BM_HierarchyPropagate)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_BornMarkovGenerator(benchmark::State& st) {
    SensorParams p;
    p.epsilon = 0.5;
    p.theta = 1.0;
    for (auto _ : st) benchmark::DoNotOptimize(make_bm_generator(p, BathSpec{0.1, 0.5, 5.0}, true));
}
BENCHMARK(BM_BornMarkovGenerator);

}  // namespace
