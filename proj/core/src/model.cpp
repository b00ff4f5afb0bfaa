#include "qthermo/model.hpp"

#include <cmath>
#include <string>

#include "qthermo/errors.hpp"

namespace qthermo {

void SensorParams::validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw Error(ErrorKind::InvalidArgument, "delta must be positive, got " + std::to_string(delta));
    }
    if (!std::isfinite(epsilon)) {
        throw Error(ErrorKind::InvalidArgument, "epsilon must be finite");
    }
    if (!(theta >= 0.0 && theta < kPi)) {
        throw Error(ErrorKind::InvalidArgument, "theta must lie in [0, pi), got " + std::to_string(theta));
    }
    if (!std::isfinite(alpha) || !std::isfinite(varphi)) {
        throw Error(ErrorKind::InvalidArgument, "initial-state angles must be finite");
    }
}

double SensorParams::rabi_frequency() const noexcept { return std::hypot(epsilon, delta); }

QubitMatrix build_sensor_hamiltonian(const SensorParams& p) {
    return 0.5 * p.epsilon * pauli::z() + 0.5 * p.delta * pauli::x();
}

QubitMatrix build_coupling_operator(const SensorParams& p) {
    return std::sin(p.theta) * pauli::z() + std::cos(p.theta) * pauli::x();
}

QubitMatrix build_initial_state(const SensorParams& p) {
    Eigen::Vector2cd psi;
    psi << std::cos(p.alpha), std::sin(p.alpha) * std::exp(-kI * p.varphi);
    return psi * psi.adjoint();
}

RotatedParams rotate_params(const SensorParams& p) {
    const double s = std::sin(p.theta);
    const double c = std::cos(p.theta);
    return RotatedParams{
        .eps_tilde = p.epsilon * s + p.delta * c,
        .delta_tilde = p.delta * s - p.epsilon * c,
        .phi = 0.5 * kPi - p.theta,
    };
}

Eigenbasis sensor_eigenbasis(const SensorParams& p) {
    // Real symmetric 2x2: closed form keeps the basis phase convention fixed.
    const double omega = p.rabi_frequency();
    const double mix = 0.5 * std::atan2(p.delta, p.epsilon);
    const double c = std::cos(mix);
    const double s = std::sin(mix);
    Eigenbasis eb;
    eb.energies << -0.5 * omega, 0.5 * omega;
    // excited = (cos, sin), ground = (-sin, cos) for H = (Omega/2)(cos 2m sz + sin 2m sx)
    eb.vectors << -s, c,
                   c, s;
    return eb;
}

}  // namespace qthermo
