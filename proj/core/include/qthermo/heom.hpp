#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "qthermo/bath.hpp"
#include "qthermo/trajectory.hpp"
#include "qthermo/types.hpp"

namespace qthermo::heom {

/// Default cap on the number of auxiliary matrices (about 64 MB per copy of the state).
inline constexpr std::size_t kDefaultIndexCap = 1'000'000;

/// Number of multi-indices of length n_terms with entries summing to <= depth,
/// i.e. binomial(depth + n_terms, n_terms). Saturates at SIZE_MAX.
std::size_t index_count(int n_terms, int depth);

/// Canonical enumeration of the hierarchy multi-indices with neighbour tables.
/// Index 0 is the zero vector (the physical density matrix); indices are
/// ordered by tier, then lexicographically with larger leading entries first.
class HierarchyLayout {
public:
    static constexpr std::int32_t kNone = -1;

    HierarchyLayout(int n_terms, int depth, std::size_t cap = kDefaultIndexCap);

    std::size_t size() const noexcept { return tier_.size(); }
    int n_terms() const noexcept { return n_terms_; }
    int depth() const noexcept { return depth_; }

    std::span<const std::uint16_t> index(std::size_t i) const {
        return {indices_.data() + i * static_cast<std::size_t>(n_terms_), static_cast<std::size_t>(n_terms_)};
    }
    int tier(std::size_t i) const { return tier_[i]; }
    /// Position of index(i) + e_l, or kNone past the truncation depth.
    std::int32_t up(std::size_t i, int l) const { return up_[i * static_cast<std::size_t>(n_terms_) + static_cast<std::size_t>(l)]; }
    /// Position of index(i) - e_l, or kNone when index(i)[l] == 0.
    std::int32_t down(std::size_t i, int l) const { return down_[i * static_cast<std::size_t>(n_terms_) + static_cast<std::size_t>(l)]; }

    /// Position of a multi-index, or kNone if it is outside the truncation.
    std::int32_t find(std::span<const std::uint16_t> nu) const;

private:
    int n_terms_;
    int depth_;
    std::vector<std::uint16_t> indices_;
    std::vector<int> tier_;
    std::vector<std::int32_t> up_;
    std::vector<std::int32_t> down_;
};

/// All auxiliary density matrices at one instant; aux[0] is the reduced state.
struct HierarchyState {
    std::shared_ptr<const HierarchyLayout> layout;
    std::vector<QubitMatrix> aux;
    double time{0.0};

    const QubitMatrix& root() const { return aux.front(); }
};

/// Root set to rho0, all other auxiliaries zero. Throws Error(HierarchyTooLarge)
/// when the index count exceeds cap.
HierarchyState build_hierarchy(const ExponentialSeries& series, int depth, const QubitMatrix& rho0,
                               std::size_t cap = kDefaultIndexCap);

/// Static data of one hierarchy: H_s, coupling, bath series and the optional
/// Markovian correction for the Matsubara terms left out of the series.
struct Problem {
    QubitMatrix hamiltonian;
    QubitMatrix coupling;
    ExponentialSeries series;
    /// Coefficient of -[S,[S,rho]] added on every tier (0 disables it). See
    /// markovian_tail_weight().
    double tail_weight{0.0};
    /// Store rho_nu / prod_l sqrt(nu_l! |zeta_l|^nu_l) instead of rho_nu. The
    /// root is unaffected; deep tiers stay O(1) rather than growing factorially.
    bool rescaled{true};
};

/// zero_frequency_noise(b) minus the part carried by the series: the weight of
/// the omitted Matsubara poles in the delta-correlated limit.
double markovian_tail_weight(const BathSpec& bath, const ExponentialSeries& series);

/// d rho_nu/dt = (L_s - nu.mu) rho_nu - i [S, sum_l rho_{nu+e_l}]
///               + sum_l nu_l Theta_l rho_{nu-e_l},
/// Theta_l = -i (Re zeta_l S^x + i Im zeta_l S^o); neighbours outside the
/// truncation contribute zero. With problem.rescaled the up and down couplings
/// carry sqrt((nu_l + 1)|zeta_l|) and nu_l / sqrt(nu_l |zeta_l|) instead.
void hierarchy_rhs(const HierarchyLayout& layout, const Problem& problem, std::span<const QubitMatrix> state,
                   std::span<QubitMatrix> derivative, int threads = 1);

/// Convenience overload returning the derivative as a new vector.
std::vector<QubitMatrix> hierarchy_rhs(const HierarchyState& state, const Problem& problem);

struct PropagationOptions {
    double dt{0.0};             // 0 selects default_step()
    int stride{1};              // record every stride-th step
    double divergence_bound{1e6};  // max |aux element| before StepInstability
    int threads{1};
    bool self_check{true};      // compare against dt/2 on a short prefix
    double self_check_tol{1e-6};
};

/// Step rule safety / (max(Omega, nu_max * depth) + bounds on the tier coupling
/// and the white-noise tail), with Omega the Rabi frequency.
double default_step(const Problem& problem, int depth, double safety = 0.5);

/// Fixed-step classical RK4 from state.time to t_end. The initial sample and
/// every stride-th step are recorded. Mutates state to the final time.
Trajectory propagate(HierarchyState& state, const Problem& problem, double t_end,
                     const PropagationOptions& opts = {});

enum class SteadyMethod {
    Propagate,  // RK4 until the windowed change falls below tol
    Solve,      // sparse LU on the full hierarchy generator
};

struct SteadyStateOptions {
    double window{20.0};
    double tol{1e-7};
    double max_time{4000.0};
    SteadyMethod method{SteadyMethod::Propagate};
};

struct SteadyState {
    QubitMatrix rho;
    double time{0.0};
    double residual{0.0};
    double dt{0.0};
};

/// Propagates until max|rho(t) - rho(t - window)| < tol; throws
/// Error(NoSteadyState) at max_time.
SteadyState steady_state(HierarchyState& state, const Problem& problem, const SteadyStateOptions& ss = {},
                         const PropagationOptions& opts = {});

/// Solves L x = 0 for the whole hierarchy with Tr rho_0 = 1 replacing one
/// redundant root equation. Same fixed point steady_state() approaches; the
/// residual is max |(L x)_i| over every auxiliary. Throws Error(NoSteadyState)
/// when the generator has no unique stationary state.
SteadyState steady_state_direct(const HierarchyLayout& layout, const Problem& problem);

/// One (k_max, depth) level of a convergence sweep.
struct ConvergenceLevel {
    int k_max{0};
    int depth{0};
    std::size_t n_aux{0};
    double dev_depth{-1.0};  // max deviation vs (k_max, previous depth); -1 if none
    double dev_k{-1.0};      // max deviation vs (previous k_max, depth); -1 if none
};

struct ConvergenceReport {
    std::vector<ConvergenceLevel> levels;
    double tol{1e-4};
    bool converged{false};
    int k_max{0};
    int depth{0};
};

/// Observable sampled for a given truncation (for instance <sigma_z(t)> on a
/// fixed grid, or a single steady-state quantity).
using LevelProbe = std::function<std::vector<double>(int k_max, int depth)>;

/// Evaluates probe on the k_ranges x depths grid and reports deviations between
/// successive levels. The resolved level is the first (k, L) whose successors in
/// both directions deviate by less than tol; converged stays false when none does.
ConvergenceReport convergence_sweep(const LevelProbe& probe, const std::vector<int>& k_values,
                                    const std::vector<int>& depth_values, double tol = 1e-4);

}  // namespace qthermo::heom
