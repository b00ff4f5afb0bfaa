#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "qthermo/types.hpp"

namespace qthermo {

struct TrajectoryMeta {
    std::string solver;
    int k_max{0};
    int depth{0};
    double dt{0.0};
    int stride{1};
    bool markovian_tail{false};
    // Diagnostics accumulated over recorded samples.
    double max_trace_error{0.0};
    double max_hermiticity_error{0.0};
    double min_eigenvalue{1.0};
    // Max |rho(dt) - rho(dt/2)| on the self-check prefix; negative when skipped.
    double step_check_deviation{-1.0};

    bool positivity_violated(double tol = 1e-7) const noexcept { return min_eigenvalue < -tol; }
};

/// Reduced density matrix samples on a strictly increasing time grid.
struct Trajectory {
    std::vector<double> times;
    std::vector<QubitMatrix> states;
    TrajectoryMeta meta;

    std::size_t size() const noexcept { return times.size(); }

    void record(double t, const QubitMatrix& rho);
};

inline void Trajectory::record(double t, const QubitMatrix& rho) {
    times.push_back(t);
    states.push_back(rho);
    meta.max_trace_error = std::max(meta.max_trace_error, std::abs(rho.trace() - 1.0));
    meta.max_hermiticity_error = std::max(meta.max_hermiticity_error, hermiticity_error(rho));
    meta.min_eigenvalue = std::min(meta.min_eigenvalue, min_eigenvalue(rho));
}

/// <sigma_z>(t) per sample.
std::vector<double> sigma_z_expectation(const Trajectory& traj);

}  // namespace qthermo
