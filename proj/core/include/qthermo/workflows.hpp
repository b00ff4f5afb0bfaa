#pragma once

#include <cstddef>

#include "qthermo/bath.hpp"
#include "qthermo/bornmarkov.hpp"
#include "qthermo/heom.hpp"
#include "qthermo/model.hpp"
#include "qthermo/trajectory.hpp"

namespace qthermo {

/// Matsubara terms behind the Born-Markov frequency shifts; the closed-form
/// half-line integrals make a long series essentially free.
inline constexpr int kBmMatsubaraTerms = 2000;

/// Fully resolved hierarchy truncation and step.
struct HeomSettings {
    int k_max{2};
    int depth{4};
    double dt{0.0};  // 0 selects heom::default_step
    bool tail_correction{false};
    int threads{1};
    std::size_t index_cap{heom::kDefaultIndexCap};
    bool self_check{true};
};

heom::Problem make_heom_problem(const SensorParams& p, const BathSpec& b, int k_max, bool tail_correction);

/// Reduced dynamics from the configured initial state, sampled every stride steps.
Trajectory heom_dynamics(const SensorParams& p, const BathSpec& b, const HeomSettings& s, double t_end, int stride);

/// Root of the hierarchy after propagating to t_end with the fixed step s.dt.
QubitMatrix heom_state_at(const SensorParams& p, const BathSpec& b, const HeomSettings& s, double t_end);

heom::SteadyState heom_steady(const SensorParams& p, const BathSpec& b, const HeomSettings& s,
                              const heom::SteadyStateOptions& ss);

bm::BmGenerator make_bm_generator(const SensorParams& p, const BathSpec& b, bool lamb_shift,
                                  int k_max = kBmMatsubaraTerms);

Trajectory bm_dynamics(const SensorParams& p, const BathSpec& b, bool lamb_shift, double t_end, double dt, int stride);

QubitMatrix bm_steady(const SensorParams& p, const BathSpec& b, bool lamb_shift);

}  // namespace qthermo
