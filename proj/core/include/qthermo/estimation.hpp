#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "qthermo/model.hpp"
#include "qthermo/trajectory.hpp"
#include "qthermo/types.hpp"

namespace qthermo {

using BlochVector = Eigen::Vector3d;

/// Default relative offset of the finite-difference stencil.
inline constexpr double kDefaultDeltaFrac = 1e-6;

/// Purity threshold below which the pure-state QFI branch is used.
inline constexpr double kPurityThreshold = 1e-12;

/// r_i = tr(sigma_i rho). Throws Error(InvalidDensity) when the trace differs
/// from 1 or rho is non-Hermitian by more than tol.
BlochVector bloch_from_density(const QubitMatrix& rho, double tol = 1e-8);

QubitMatrix density_from_bloch(const BlochVector& r);

/// |dr|^2 + (r.dr)^2 / (1 - |r|^2). Near purity the second term is 0/0 and is
/// dropped; r.dr must then vanish (Error(InconsistentPureDerivative)).
double qfi_bloch(const BlochVector& r, const BlochVector& dr);

/// Offsets beta + {-2, -1, +1, +2} delta.
std::array<double, 4> stencil_points(double beta, double delta);

/// Fourth-order central difference from the samples at stencil_points().
template <typename T>
T stencil_derivative(const std::array<T, 4>& f, double delta) {
    return (-f[3] + 8.0 * f[2] - 8.0 * f[1] + f[0]) / (12.0 * delta);
}

/// Fourth-order reconstruction of f(beta) from the four off-center samples.
template <typename T>
T stencil_center(const std::array<T, 4>& f) {
    return (4.0 * (f[1] + f[2]) - (f[0] + f[3])) / 6.0;
}

/// (-f(b+2d) + 8 f(b+d) - 8 f(b-d) + f(b-2d)) / (12 d); exact through degree 4.
double finite_diff(const std::function<double(double)>& f, double beta, double delta);

/// Produces a trajectory at the given inverse temperature. Bath coefficients
/// must be rebuilt from beta.
using TrajectorySolver = std::function<Trajectory(double beta)>;

/// The four stencil runs of one QFI evaluation.
struct OffsetRuns {
    double beta{0.0};
    double delta{0.0};
    std::array<Trajectory, 4> runs;
};

/// Runs solver at the four stencil points, concurrently when threads > 1.
/// Throws Error(GridMismatch) unless all time grids coincide.
OffsetRuns run_offsets(const TrajectorySolver& solver, double beta, double delta_frac = kDefaultDeltaFrac,
                       int threads = 1);

struct QfiCurve {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<BlochVector> bloch;  // center-beta Bloch vector per sample
    double beta{0.0};
    double delta_frac{0.0};
    std::vector<std::string> provenance;  // one tag per offset run
};

QfiCurve qfi_from_offsets(const OffsetRuns& runs);

QfiCurve qfi_dynamics(const TrajectorySolver& solver, double beta, double delta_frac = kDefaultDeltaFrac,
                      int threads = 1);

struct TimedValue {
    double time{0.0};
    double value{0.0};
};

/// Sampled maximum; the earliest sample wins ties.
TimedValue max_qfi_over_time(const QfiCurve& curve);

/// Strict interior local maxima with prominence above rel_prominence * max.
std::vector<std::size_t> local_maxima(const std::vector<double>& values, double rel_prominence = 1e-3);

/// Var(O) / |d<O>/d beta|^2 per sample, with +infinity where the derivative is
/// below 1e-12 in magnitude.
std::vector<double> error_propagation_variance(const OffsetRuns& runs, const QubitMatrix& observable);

QubitMatrix gibbs_state(const SensorParams& p, double beta);

/// Gibbs Bloch vector -tanh(beta Omega / 2) (delta, 0, epsilon) / Omega and its beta-derivative.
BlochVector gibbs_bloch(const SensorParams& p, double beta);
BlochVector gibbs_bloch_derivative(const SensorParams& p, double beta);

/// Omega^2 / (2 + 2 cosh(beta Omega)).
double gibbs_qfi(double omega, double beta);

/// Root of x sinh x = 2 (1 + cosh x) on [1, 5], divided by beta.
double omega_star_x();
double omega_star(double beta);

/// Basis for the steady-state population ratio.
enum class PopulationBasis {
    Eigen,   // eigenbasis of H_s
    SigmaZ,  // bare |e>, |g>
};

const char* to_string(PopulationBasis basis) noexcept;

/// Lower-state over upper-state population. Throws Error(DegeneratePopulation)
/// when either population is below 1e-12.
double population_ratio(const QubitMatrix& rho, const SensorParams& p, PopulationBasis basis = PopulationBasis::Eigen);

/// beta^-1 ln(rho_gg / rho_ee).
double renormalized_frequency_from_steady(const QubitMatrix& rho_inf, const SensorParams& p, double beta,
                                          PopulationBasis basis = PopulationBasis::Eigen);

/// Maps an inverse temperature to a stationary state (all offsets must use a
/// common, beta-independent discretisation so the difference is smooth).
using SteadySolver = std::function<QubitMatrix(double beta)>;

struct SteadyQfi {
    QubitMatrix rho;  // center estimate
    double qfi{0.0};
};

SteadyQfi steady_qfi(const SteadySolver& solver, double beta, double delta_frac = kDefaultDeltaFrac, int threads = 1);

}  // namespace qthermo
