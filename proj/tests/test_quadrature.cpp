#include <cmath>

#include <gtest/gtest.h>

#include "qthermo/errors.hpp"
#include "qthermo/quadrature.hpp"

using namespace qthermo;

TEST(Quadrature, FiniteInterval) {
    const auto r = quad::integrate([](double x) { return std::sin(x); }, 0.0, M_PI);
    EXPECT_NEAR(r.value, 2.0, 1e-12);
}

TEST(Quadrature, SemiInfinite) {
    const auto r = quad::integrate([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, INFINITY);
    EXPECT_NEAR(r.value, M_PI / 2, 1e-10);
}

TEST(Quadrature, FourierCosineOfLorentzian) {
    // int_0^inf cos(wt) / (1 + w^2) dw = (pi / 2) exp(-t)
    const auto r = quad::fourier_cos([](double w) { return 1.0 / (1.0 + w * w); }, 2.0);
    EXPECT_NEAR(r.value, M_PI / 2 * std::exp(-2.0), 1e-9);
}

TEST(Quadrature, FourierSine) {
    // int_0^inf w sin(wt) / (1 + w^2) dw = (pi / 2) exp(-t)
    const auto r = quad::fourier_sin([](double w) { return w / (1.0 + w * w); }, 1.5);
    EXPECT_NEAR(r.value, M_PI / 2 * std::exp(-1.5), 1e-8);
}

TEST(Quadrature, LogGridIntegratesSmoothSpectra) {
    const quad::FixedGrid g = quad::make_log_grid(1e-4, 1e3, 80);
    ASSERT_EQ(g.nodes.size(), g.weights.size());
    std::vector<double> f;
    for (const double w : g.nodes) f.push_back(w * std::exp(-w));
    EXPECT_NEAR(g.integrate(f), 1.0, 1e-12);
    f.clear();
    for (const double w : g.nodes) f.push_back(1.0 / (1.0 + w * w));
    EXPECT_NEAR(g.integrate(f), M_PI / 2, 1e-10);
}

TEST(Quadrature, DivergentIntegralThrows) {
    EXPECT_THROW(quad::integrate([](double x) { return 1.0 / x; }, 0.0, 1.0), Error);
}
