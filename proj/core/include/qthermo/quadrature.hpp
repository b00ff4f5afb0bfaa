#pragma once

#include <functional>
#include <vector>

namespace qthermo::quad {

using RealFn = std::function<double(double)>;

struct Result {
    double value{0.0};
    double error{0.0};
};

/// Adaptive Gauss-Kronrod (61 point) on [a, b]; b may be +infinity.
/// Throws Error(QuadratureNoConvergence) when the error estimate exceeds
/// rel_tol * |value| + abs_tol.
Result integrate(const RealFn& f, double a, double b, double rel_tol = 1e-10, double abs_tol = 1e-14);

/// Sums integrate() over consecutive panels of width <= panel. Used for
/// oscillatory integrands on finite ranges.
Result integrate_panels(const RealFn& f, double a, double b, double panel, double rel_tol = 1e-10,
                        double abs_tol = 1e-14);

/// Ooura's double-exponential rule for int_0^inf f(w) cos(w t) dw, t > 0.
/// Converged when the error estimate is below rel_tol |value| + abs_tol.
Result fourier_cos(const RealFn& f, double t, double rel_tol = 1e-10, double abs_tol = 0.0);

/// Ooura's double-exponential rule for int_0^inf f(w) sin(w t) dw, t > 0.
Result fourier_sin(const RealFn& f, double t, double rel_tol = 1e-10, double abs_tol = 0.0);

/// Fixed composite Gauss-Legendre rule on [0, inf) built from panels uniform in
/// log(w). Nodes and weights are deterministic for given arguments, so functions
/// can be tabulated on the nodes and integrated without interpolation.
struct FixedGrid {
    std::vector<double> nodes;
    std::vector<double> weights;

    double integrate(const std::vector<double>& values) const;
};

/// Panels span log-range [log w_min, log w_max]; below w_min a single Gauss
/// panel on [0, w_min] is added; above w_max the remaining tail is mapped with
/// w = w_max / s, s in (0, 1].
FixedGrid make_log_grid(double w_min, double w_max, int panels);

}  // namespace qthermo::quad
