#include "qthermo/quadrature.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "qthermo/errors.hpp"

namespace qthermo::quad {

namespace {

constexpr unsigned kMaxDepth = 18;
constexpr unsigned kGaussOrder = 30;

// Error estimates from any rule are at best a few ulps of the L1 norm; a GK
// estimate this close to roundoff is treated as converged.
bool within(double value, double error, double l1, double rel_tol, double abs_tol) {
    const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * l1;
    return error <= rel_tol * std::abs(value) + abs_tol + roundoff;
}

void fail(const char* what, double value, double error) {
    throw Error(ErrorKind::QuadratureNoConvergence,
                std::string(what) + ": value " + std::to_string(value) + ", error estimate " +
                    std::to_string(error));
}

}  // namespace

Result integrate(const RealFn& f, double a, double b, double rel_tol, double abs_tol) {
    using boost::math::quadrature::gauss_kronrod;
    double error = 0.0;
    double l1 = 0.0;
    const double value = gauss_kronrod<double, 61>::integrate(f, a, b, kMaxDepth, rel_tol, &error, &l1);
    if (!std::isfinite(value) || !within(value, error, l1, rel_tol, abs_tol)) {
        fail("gauss-kronrod", value, error);
    }
    return {value, error};
}

Result integrate_panels(const RealFn& f, double a, double b, double panel, double rel_tol, double abs_tol) {
    Result total;
    const auto n = static_cast<long>(std::ceil((b - a) / panel));
    const double h = (b - a) / static_cast<double>(std::max(n, 1L));
    for (long i = 0; i < std::max(n, 1L); ++i) {
        const double lo = a + h * static_cast<double>(i);
        const double hi = (i + 1 == n) ? b : lo + h;
        // Per-panel absolute tolerance; the sum is checked by the caller's budget.
        const Result r = integrate(f, lo, hi, rel_tol, abs_tol / static_cast<double>(std::max(n, 1L)));
        total.value += r.value;
        total.error += r.error;
    }
    return total;
}

Result fourier_cos(const RealFn& f, double t, double rel_tol, double abs_tol) {
    // Node tables are costly to build and grow on demand; keep one per thread and tolerance.
    using Integrator = boost::math::quadrature::ooura_fourier_cos<double>;
    thread_local std::map<double, Integrator> cache;
    auto it = cache.find(rel_tol);
    if (it == cache.end()) it = cache.emplace(rel_tol, Integrator(rel_tol)).first;
    const auto [value, rel_err] = it->second.integrate(f, t);
    if (!std::isfinite(value) || rel_err * std::abs(value) > 10.0 * rel_tol * std::abs(value) + abs_tol) {
        fail("ooura cos", value, rel_err * std::abs(value));
    }
    return {value, rel_err * std::abs(value)};
}

Result fourier_sin(const RealFn& f, double t, double rel_tol, double abs_tol) {
    // Node tables are costly to build and grow on demand; keep one per thread and tolerance.
    using Integrator = boost::math::quadrature::ooura_fourier_sin<double>;
    thread_local std::map<double, Integrator> cache;
    auto it = cache.find(rel_tol);
    if (it == cache.end()) it = cache.emplace(rel_tol, Integrator(rel_tol)).first;
    const auto [value, rel_err] = it->second.integrate(f, t);
    if (!std::isfinite(value) || rel_err * std::abs(value) > 10.0 * rel_tol * std::abs(value) + abs_tol) {
        fail("ooura sin", value, rel_err * std::abs(value));
    }
    return {value, rel_err * std::abs(value)};
}

double FixedGrid::integrate(const std::vector<double>& values) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * values[i];
    return sum;
}

FixedGrid make_log_grid(double w_min, double w_max, int panels) {
    using Rule = boost::math::quadrature::gauss<double, kGaussOrder>;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();

    FixedGrid grid;
    // Gauss rule on [lo, hi] in variable s, mapped through w = map(s).
    auto add_panel = [&](double lo, double hi, auto&& map, auto&& jac) {
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        for (std::size_t k = 0; k < x.size(); ++k) {
            for (const double sign : {-1.0, 1.0}) {
                if (x[k] == 0.0 && sign > 0.0) continue;
                const double s = mid + sign * half * x[k];
                grid.nodes.push_back(map(s));
                grid.weights.push_back(half * w[k] * jac(s));
            }
        }
    };

    auto identity = [](double s) { return s; };
    auto unit = [](double) { return 1.0; };
    add_panel(0.0, w_min, identity, unit);

    const double u0 = std::log(w_min);
    const double u1 = std::log(w_max);
    const double du = (u1 - u0) / panels;
    auto expo = [](double u) { return std::exp(u); };
    for (int p = 0; p < panels; ++p) {
        add_panel(u0 + du * p, u0 + du * (p + 1), expo, expo);
    }

    auto inv = [w_max](double s) { return w_max / s; };
    auto inv_jac = [w_max](double s) { return w_max / (s * s); };
    add_panel(0.0, 1.0, inv, inv_jac);
    return grid;
}

}  // namespace qthermo::quad
