#pragma once

#include <memory>
#include <vector>

#include "qthermo/bath.hpp"
#include "qthermo/model.hpp"
#include "qthermo/quadrature.hpp"

namespace qthermo::polaron {

/// Variational displacement profile
///   S(w) = [1 + eta^2 dt^2 / (w Op) coth(beta w / 2) tanh(beta Op / 2)]^-1
/// with dt the rotated tunneling and Op the renormalised Rabi frequency.
double frak_s(double omega, double eta, double omega_p, const RotatedParams& rp, double beta);

/// S(w) sampled on the nodes of a fixed quadrature grid.
struct FrakSTable {
    std::shared_ptr<const quad::FixedGrid> grid;
    std::vector<double> values;
    bool identically_one{false};  // eta * delta_tilde == 0, so S = 1 everywhere
};

/// Log-spaced grid adapted to the bath and sensor scales, shared by the profile
/// tabulation and the exponent integral.
quad::FixedGrid make_grid(const BathSpec& b, double omega, int panels = 160);

FrakSTable tabulate_frak_s(std::shared_ptr<const quad::FixedGrid> grid, double eta, double omega_p, const RotatedParams& rp,
                           double beta);

struct EtaResult {
    double eta{1.0};
    double exponent{0.0};  // 2 int J S^2 coth / w^2
    bool divergent{false};
};

/// eta = exp(-2 int J(w) / w^2 S(w)^2 coth(beta w / 2) dw). For an
/// untransformed profile (S = 1) at chi > 0 the exponent diverges; the result is
/// flagged with eta = 0.
EtaResult eta_integral(const BathSpec& b, const FrakSTable& table);

struct FixedPoint {
    double eta{1.0};
    double omega_p{0.0};
};

struct PolaronSolution {
    double eta{1.0};
    double omega_p{0.0};
    double omega{0.0};            // bare Rabi frequency
    FrakSTable frak_s;
    int iterations{0};
    double residual{0.0};
    double energy_shift{0.0};     // int J / w S (S - 2) dw; excluded from omega_p
    bool divergent{false};        // rotated tunneling vanished with chi > 0
    std::vector<FixedPoint> alternatives;  // other fixed points on (0, 1]
};

struct SolveOptions {
    double damping{0.5};
    double tol{1e-10};
    int max_iterations{10000};
    int panels{160};
    bool scan_alternatives{true};
    int scan_points{200};
};

/// Damped fixed-point iteration from eta = 1, Op = Omega, alternating profile,
/// eta and Op^2 = eps_tilde^2 + eta^2 delta_tilde^2 until |d eta| < tol.
/// Throws Error(NoConvergence) after max_iterations.
PolaronSolution solve_selfconsistent(const SensorParams& p, const BathSpec& b, const SolveOptions& opts = {});

}  // namespace qthermo::polaron
