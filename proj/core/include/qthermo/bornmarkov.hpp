#pragma once

#include "qthermo/bath.hpp"
#include "qthermo/model.hpp"
#include "qthermo/trajectory.hpp"

namespace qthermo::bm {

using SuperOperator = Eigen::Matrix4cd;

/// Row-major vectorisation: vec(rho) = (rho_00, rho_01, rho_10, rho_11).
Eigen::Vector4cd vectorize(const QubitMatrix& rho);
QubitMatrix unvectorize(const Eigen::Vector4cd& v);

/// Superoperators of X -> A X and X -> X A.
SuperOperator left_multiply(const QubitMatrix& a);
SuperOperator right_multiply(const QubitMatrix& a);

/// Born-Markov (Redfield-type) generator
///   L = L_s - S^x Upsilon^x + S^x Xi^o,
///   Upsilon = int_0^inf C_R(t) S(-t) dt,  Xi = -i int_0^inf C_I(t) S(-t) dt.
struct BmGenerator {
    SuperOperator matrix;
    QubitMatrix upsilon;
    QubitMatrix xi;
    bool lamb_shift_included{false};

    QubitMatrix apply(const QubitMatrix& rho) const { return unvectorize(matrix * vectorize(rho)); }
};

/// Closed-form half-line integrals from the exponential series: in the H_s
/// eigenbasis Upsilon_mn = S_mn sum_l Re(zeta_l) / (nu_l + i w_mn) and
/// Xi_mn = -i S_mn sum_l Im(zeta_l) / (nu_l + i w_mn), w_mn = E_m - E_n.
/// Without the Lamb shift only the real part of each element is kept.
BmGenerator build_bm_generator(const SensorParams& p, const ExponentialSeries& s, bool lamb_shift = false);

/// As above from a bath, with the dissipative part of Upsilon taken in closed
/// form, (pi/2) J(|w|) coth(beta |w| / 2), and only the shifts from the first
/// k_max Matsubara terms.
BmGenerator build_bm_generator(const SensorParams& p, const BathSpec& b, bool lamb_shift, int k_max);

struct BmOptions {
    double dt{0.01};
    int stride{1};
    double divergence_bound{1e6};
};

/// Classical RK4 on the vectorised equation over [0, t_end].
Trajectory bm_propagate(const BmGenerator& gen, const QubitMatrix& rho0, double t_end, const BmOptions& opts = {});

/// Unit-trace null vector of the generator. Throws Error(DegenerateSteadyState)
/// unless exactly one singular value is below tol * ||L||.
QubitMatrix bm_steady_state(const BmGenerator& gen, double tol = 1e-10);

}  // namespace qthermo::bm
