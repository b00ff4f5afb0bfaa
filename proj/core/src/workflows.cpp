#include "qthermo/workflows.hpp"

#include <algorithm>
#include <cmath>

namespace qthermo {

heom::Problem make_heom_problem(const SensorParams& p, const BathSpec& b, int k_max, bool tail_correction) {
    heom::Problem problem;
    problem.hamiltonian = build_sensor_hamiltonian(p);
    problem.coupling = build_coupling_operator(p);
    problem.series = matsubara_expand(b, k_max);
    if (tail_correction) problem.tail_weight = heom::markovian_tail_weight(b, problem.series);
    return problem;
}

namespace {

heom::PropagationOptions propagation_options(const HeomSettings& s, int stride) {
    heom::PropagationOptions opts;
    opts.dt = s.dt;
    opts.stride = stride;
    opts.threads = s.threads;
    opts.self_check = s.self_check;
    return opts;
}

}  // namespace

Trajectory heom_dynamics(const SensorParams& p, const BathSpec& b, const HeomSettings& s, double t_end, int stride) {
    const heom::Problem problem = make_heom_problem(p, b, s.k_max, s.tail_correction);
    heom::HierarchyState state = heom::build_hierarchy(problem.series, s.depth, build_initial_state(p), s.index_cap);
    return heom::propagate(state, problem, t_end, propagation_options(s, stride));
}

QubitMatrix heom_state_at(const SensorParams& p, const BathSpec& b, const HeomSettings& s, double t_end) {
    const heom::Problem problem = make_heom_problem(p, b, s.k_max, s.tail_correction);
    heom::HierarchyState state = heom::build_hierarchy(problem.series, s.depth, build_initial_state(p), s.index_cap);
    const long steps = std::max(1L, static_cast<long>(std::llround(t_end / std::max(s.dt, 1e-300))));
    heom::propagate(state, problem, t_end, propagation_options(s, static_cast<int>(std::min<long>(steps, 1L << 30))));
    return state.root();
}

heom::SteadyState heom_steady(const SensorParams& p, const BathSpec& b, const HeomSettings& s,
                              const heom::SteadyStateOptions& ss) {
    const heom::Problem problem = make_heom_problem(p, b, s.k_max, s.tail_correction);
    heom::HierarchyState state = heom::build_hierarchy(problem.series, s.depth, build_initial_state(p), s.index_cap);
    if (ss.method == heom::SteadyMethod::Solve) return heom::steady_state_direct(*state.layout, problem);
    return heom::steady_state(state, problem, ss, propagation_options(s, 1));
}

bm::BmGenerator make_bm_generator(const SensorParams& p, const BathSpec& b, bool lamb_shift, int k_max) {
    return bm::build_bm_generator(p, b, lamb_shift, k_max);
}

Trajectory bm_dynamics(const SensorParams& p, const BathSpec& b, bool lamb_shift, double t_end, double dt, int stride) {
    bm::BmOptions opts;
    opts.dt = dt;
    opts.stride = stride;
    return bm::bm_propagate(make_bm_generator(p, b, lamb_shift), build_initial_state(p), t_end, opts);
}

QubitMatrix bm_steady(const SensorParams& p, const BathSpec& b, bool lamb_shift) {
    return bm::bm_steady_state(make_bm_generator(p, b, lamb_shift));
}

}  // namespace qthermo
