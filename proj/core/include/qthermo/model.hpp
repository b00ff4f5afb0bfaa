#pragma once

#include "qthermo/types.hpp"

namespace qthermo {

/// Qubit sensor: H_s = (epsilon/2) sigma_z + (delta/2) sigma_x, coupled to the
/// reservoir through sin(theta) sigma_z + cos(theta) sigma_x, prepared in
/// cos(alpha)|e> + sin(alpha) exp(-i varphi)|g>.
///
/// Energies are in units of the tunneling delta (delta = 1 by convention) and
/// times in 1/delta.
struct SensorParams {
    double epsilon{0.0};  // bias
    double delta{1.0};    // tunneling
    double theta{0.0};    // coupling angle in [0, pi)
    double alpha{kPi / 4.0};
    double varphi{kPi / 2.0};

    /// Throws Error(InvalidArgument) when delta <= 0 or theta outside [0, pi).
    void validate() const;

    double rabi_frequency() const noexcept;
};

/// Parameters after the rotation exp(-i phi sigma_y / 2) that makes the
/// coupling operator sigma_z.
struct RotatedParams {
    double eps_tilde{0.0};
    double delta_tilde{0.0};
    double phi{0.0};
};

QubitMatrix build_sensor_hamiltonian(const SensorParams& p);
QubitMatrix build_coupling_operator(const SensorParams& p);
QubitMatrix build_initial_state(const SensorParams& p);

/// phi = pi/2 - theta, the continuous branch of arctan(cot theta) on [0, pi).
RotatedParams rotate_params(const SensorParams& p);

/// Orthonormal eigenbasis of H_s; column 0 is the ground state (energy -Omega/2),
/// column 1 the excited state.
struct Eigenbasis {
    Eigen::Vector2d energies;
    QubitMatrix vectors;
};

Eigenbasis sensor_eigenbasis(const SensorParams& p);

}  // namespace qthermo
