#include "qthermo/polaron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "qthermo/errors.hpp"

namespace qthermo::polaron {

namespace {

double coth(double x) { return 1.0 / std::tanh(x); }

double renormalized_omega(const RotatedParams& rp, double eta) {
    return std::hypot(rp.eps_tilde, eta * rp.delta_tilde);
}

}  // namespace

double frak_s(double omega, double eta, double omega_p, const RotatedParams& rp, double beta) {
    if (!(omega > 0.0)) throw Error(ErrorKind::InvalidArgument, "frak_s needs omega > 0");
    const double g = eta * eta * rp.delta_tilde * rp.delta_tilde;
    if (g == 0.0) return 1.0;
    // tanh(beta Op / 2) / Op -> beta / 2 as Op -> 0.
    const double x = 0.5 * beta * omega_p;
    const double tanh_over = omega_p > 0.0 ? std::tanh(x) / omega_p : 0.5 * beta;
    const double y = 0.5 * beta * omega;
    // coth(y) / omega, written to stay finite for large y and tiny omega.
    const double coth_over = y < 1e-8 ? 2.0 / (beta * omega * omega) : coth(y) / omega;
    return 1.0 / (1.0 + g * coth_over * tanh_over);
}

quad::FixedGrid make_grid(const BathSpec& b, double omega, int panels) {
    const double temperature = 1.0 / b.beta;
    const double lo = std::min({b.omega_c, temperature, omega > 0.0 ? omega : b.omega_c});
    const double hi = std::max({b.omega_c, temperature, omega});
    return quad::make_log_grid(1e-5 * lo, 1e4 * hi, panels);
}

FrakSTable tabulate_frak_s(std::shared_ptr<const quad::FixedGrid> grid, double eta, double omega_p,
                           const RotatedParams& rp, double beta) {
    FrakSTable t;
    t.identically_one = eta * rp.delta_tilde == 0.0;
    t.values.reserve(grid->nodes.size());
    for (const double w : grid->nodes) t.values.push_back(frak_s(w, eta, omega_p, rp, beta));
    t.grid = std::move(grid);
    return t;
}

EtaResult eta_integral(const BathSpec& b, const FrakSTable& table) {
    EtaResult r;
    if (b.chi == 0.0) return r;
    if (table.identically_one) {
        r.eta = 0.0;
        r.exponent = std::numeric_limits<double>::infinity();
        r.divergent = true;
        return r;
    }
    const auto& nodes = table.grid->nodes;
    std::vector<double> f(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double w = nodes[i];
        const double s = table.values[i];
        const double y = 0.5 * b.beta * w;
        const double c = y < 1e-8 ? 1.0 / y : coth(y);
        f[i] = spectral_density(b, w) / (w * w) * s * s * c;
    }
    r.exponent = 2.0 * table.grid->integrate(f);
    r.eta = std::exp(-r.exponent);
    return r;
}

namespace {

struct Map {
    const BathSpec& bath;
    const RotatedParams& rp;
    std::shared_ptr<const quad::FixedGrid> grid;

    // One pass eta -> profile -> eta'.
    EtaResult operator()(double eta) const {
        const FrakSTable t = tabulate_frak_s(grid, eta, renormalized_omega(rp, eta), rp, bath.beta);
        return eta_integral(bath, t);
    }
};

double energy_shift(const BathSpec& b, const FrakSTable& t) {
    if (b.chi == 0.0) return 0.0;
    const auto& nodes = t.grid->nodes;
    std::vector<double> f(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double s = t.values[i];
        f[i] = spectral_density(b, nodes[i]) / nodes[i] * s * (s - 2.0);
    }
    return t.grid->integrate(f);
}

std::vector<double> scan_fixed_points(const Map& map, int points) {
    std::vector<double> roots;
    const auto h = [&](double eta) { return map(eta).eta - eta; };
    double prev_x = 1.0;
    double prev_h = h(prev_x);
    if (prev_h == 0.0) roots.push_back(prev_x);
    for (int i = points - 1; i >= 1; --i) {
        const double x = static_cast<double>(i) / points;
        const double hx = h(x);
        if (hx == 0.0) {
            roots.push_back(x);
        } else if ((hx < 0.0) != (prev_h < 0.0) && prev_h != 0.0) {
            std::uintmax_t it = 100;
            const auto tol = [](double a, double b) { return std::abs(b - a) < 1e-13; };
            const auto br = boost::math::tools::toms748_solve(h, x, prev_x, hx, prev_h, tol, it);
            roots.push_back(0.5 * (br.first + br.second));
        }
        prev_x = x;
        prev_h = hx;
    }
    return roots;
}

}  // namespace

PolaronSolution solve_selfconsistent(const SensorParams& p, const BathSpec& b, const SolveOptions& opts) {
    p.validate();
    b.validate();
    if (!(opts.damping > 0.0 && opts.damping <= 1.0) || opts.max_iterations < 1) {
        throw Error(ErrorKind::InvalidArgument, "invalid polaron solver options");
    }
    const RotatedParams rp = rotate_params(p);
    PolaronSolution sol;
    sol.omega = p.rabi_frequency();
    auto grid = std::make_shared<const quad::FixedGrid>(make_grid(b, sol.omega, opts.panels));
    const Map map{b, rp, grid};

    double eta = 1.0;
    double omega_p = sol.omega;
    for (int it = 1;; ++it) {
        const EtaResult next = map(eta);
        if (next.divergent) {
            sol.divergent = true;
            eta = 0.0;
            omega_p = renormalized_omega(rp, 0.0);
            sol.iterations = it;
            sol.residual = 0.0;
            break;
        }
        const double updated = (1.0 - opts.damping) * eta + opts.damping * next.eta;
        const double change = std::abs(updated - eta);
        eta = updated;
        omega_p = renormalized_omega(rp, eta);
        sol.iterations = it;
        sol.residual = change;
        if (change < opts.tol) break;
        if (it >= opts.max_iterations) {
            throw Error(ErrorKind::NoConvergence, "polaron iteration stalled, last |d eta| = " + std::to_string(change));
        }
    }
    sol.eta = eta;
    sol.omega_p = omega_p;
    sol.frak_s = tabulate_frak_s(grid, eta, omega_p, rp, b.beta);
    sol.energy_shift = sol.divergent ? 0.0 : energy_shift(b, sol.frak_s);

    if (opts.scan_alternatives && b.chi > 0.0 && !sol.divergent) {
        for (const double root : scan_fixed_points(map, opts.scan_points)) {
            if (std::abs(root - eta) > 1e-6) sol.alternatives.push_back({root, renormalized_omega(rp, root)});
        }
    }
    return sol;
}

}  // namespace qthermo::polaron
