#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace qthermo {

using Complex = std::complex<double>;

/// 2x2 complex operator on the sensor Hilbert space. Basis order is (|e>, |g>),
/// with sigma_z |e> = +|e>.
using QubitMatrix = Eigen::Matrix2cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

namespace pauli {

inline QubitMatrix identity() { return QubitMatrix::Identity(); }

inline QubitMatrix x() {
    QubitMatrix m;
    m << 0.0, 1.0,
         1.0, 0.0;
    return m;
}

inline QubitMatrix y() {
    QubitMatrix m;
    m << 0.0, -kI,
         kI, 0.0;
    return m;
}

inline QubitMatrix z() {
    QubitMatrix m;
    m << 1.0, 0.0,
         0.0, -1.0;
    return m;
}

}  // namespace pauli

inline QubitMatrix commutator(const QubitMatrix& a, const QubitMatrix& b) { return a * b - b * a; }
inline QubitMatrix anticommutator(const QubitMatrix& a, const QubitMatrix& b) { return a * b + b * a; }

/// Largest elementwise modulus of rho - rho^dagger.
inline double hermiticity_error(const QubitMatrix& rho) {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

/// Smallest eigenvalue of the Hermitian part of rho.
inline double min_eigenvalue(const QubitMatrix& rho) {
    const QubitMatrix h = 0.5 * (rho + rho.adjoint());
    const double a = h(0, 0).real();
    const double d = h(1, 1).real();
    const double b = std::abs(h(0, 1));
    return 0.5 * (a + d) - std::sqrt(0.25 * (a - d) * (a - d) + b * b);
}

}  // namespace qthermo
