#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "qthermo/errors.hpp"
#include "qthermo/polaron.hpp"
#include "qthermo/quadrature.hpp"

using namespace qthermo;

namespace {

SensorParams table_sensor() {
    SensorParams p;
    p.epsilon = 2.0;
    p.theta = 2.0 * kPi / 3.0;
    return p;
}

BathSpec table_bath(double chi) { return BathSpec{chi, 0.8, 0.95}; }

}  // namespace

TEST(FrakS, Limits) {
    const RotatedParams rp = rotate_params(table_sensor());
    ASSERT_NE(rp.delta_tilde, 0.0);
    EXPECT_NEAR(polaron::frak_s(1e8, 0.9, 1.5, rp, 0.95), 1.0, 1e-7);
    const double a = polaron::frak_s(1e-4, 0.9, 1.5, rp, 0.95);
    const double b = polaron::frak_s(2e-4, 0.9, 1.5, rp, 0.95);
    EXPECT_LT(a, 1e-6);
    EXPECT_NEAR(b / a, 4.0, 1e-3);  // quadratic onset
    RotatedParams flat = rp;
    flat.delta_tilde = 0.0;
    EXPECT_EQ(polaron::frak_s(0.3, 0.9, 1.5, flat, 0.95), 1.0);
}

TEST(Eta, Limits) {
    const SensorParams p = table_sensor();
    const RotatedParams rp = rotate_params(p);
    auto grid = std::make_shared<const quad::FixedGrid>(polaron::make_grid(table_bath(0.0), p.rabi_frequency()));
    const auto t = polaron::tabulate_frak_s(grid, 1.0, p.rabi_frequency(), rp, 0.95);
    EXPECT_EQ(polaron::eta_integral(table_bath(0.0), t).eta, 1.0);

    // Coupling parallel to H_s: the rotated tunneling vanishes and the exponent diverges.
    SensorParams par;
    par.epsilon = 0.0;
    par.theta = 0.0;
    const RotatedParams rpar = rotate_params(par);
    EXPECT_NEAR(rpar.delta_tilde, 0.0, 1e-15);
    const auto tp = polaron::tabulate_frak_s(grid, 1.0, 1.0, RotatedParams{rpar.eps_tilde, 0.0, rpar.phi}, 1.0);
    const auto r = polaron::eta_integral(BathSpec{0.1, 1.0, 1.0}, tp);
    EXPECT_TRUE(r.divergent);
    EXPECT_EQ(r.eta, 0.0);
}

TEST(Eta, FixedGridMatchesAdaptiveQuadrature) {
    const SensorParams p = table_sensor();
    const BathSpec b = table_bath(0.3);
    const RotatedParams rp = rotate_params(p);
    const double eta = 0.8;
    const double op = std::hypot(rp.eps_tilde, eta * rp.delta_tilde);
    auto grid = std::make_shared<const quad::FixedGrid>(polaron::make_grid(b, p.rabi_frequency()));
    const auto table = polaron::tabulate_frak_s(grid, eta, op, rp, b.beta);
    const double fixed = polaron::eta_integral(b, table).exponent;
    const auto f = [&](double w) {
        const double s = polaron::frak_s(w, eta, op, rp, b.beta);
        return spectral_density(b, w) / (w * w) * s * s / std::tanh(0.5 * b.beta * w);
    };
    const double adaptive = 2.0 * (quad::integrate(f, 0.0, 1.0, 1e-12).value + quad::integrate(f, 1.0, INFINITY, 1e-12).value);
    EXPECT_NEAR(fixed, adaptive, 1e-9 * adaptive);
}

TEST(Polaron, UncoupledIsIdentity) {
    const auto sol = polaron::solve_selfconsistent(table_sensor(), table_bath(0.0));
    EXPECT_EQ(sol.eta, 1.0);
    EXPECT_DOUBLE_EQ(sol.omega_p, sol.omega);
}

// Properties over the coupling grid: invariants, residual and monotonicity.
TEST(PolaronProperty, InvariantsAlongCouplingGrid) {
    const SensorParams p = table_sensor();
    const RotatedParams rp = rotate_params(p);
    double prev = 1.0 + 1e-12;
    for (const double chi : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5}) {
        const BathSpec b = table_bath(chi);
        const auto sol = polaron::solve_selfconsistent(p, b);
        EXPECT_FALSE(sol.divergent);
        EXPECT_GT(sol.eta, 0.0);
        EXPECT_LE(sol.eta, 1.0);
        EXPECT_LE(sol.omega_p, sol.omega);
        const double expected = rp.eps_tilde * rp.eps_tilde + sol.eta * sol.eta * rp.delta_tilde * rp.delta_tilde;
        EXPECT_NEAR(sol.omega_p * sol.omega_p, expected, 1e-10 * expected);
        for (const double s : sol.frak_s.values) {
            EXPECT_GT(s, 0.0);
            EXPECT_LT(s, 1.0);
        }
        // One more undamped pass moves eta by less than 1e-9.
        const auto again = polaron::eta_integral(b, polaron::tabulate_frak_s(sol.frak_s.grid, sol.eta, sol.omega_p, rp, b.beta));
        EXPECT_LT(std::abs(again.eta - sol.eta), 1e-9);
        EXPECT_LT(sol.omega_p / sol.omega, prev);
        prev = sol.omega_p / sol.omega;
        EXPECT_LT(sol.energy_shift, 0.0);
    }
}

TEST(Polaron, IterationCapIsReported) {
    polaron::SolveOptions opts;
    opts.max_iterations = 2;
    opts.tol = 1e-15;
    try {
        polaron::solve_selfconsistent(table_sensor(), table_bath(0.5), opts);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
    }
}

TEST(Polaron, DivergentWhenCouplingParallelToHamiltonian) {
    SensorParams p;
    p.epsilon = 0.0;
    p.theta = 0.0;
    const auto sol = polaron::solve_selfconsistent(p, BathSpec{0.1, 1.0, 1.0});
    EXPECT_TRUE(sol.divergent);
    EXPECT_EQ(sol.eta, 0.0);
}
