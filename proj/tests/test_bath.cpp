#include <cmath>

#include <gtest/gtest.h>

#include "qthermo/bath.hpp"
#include "qthermo/errors.hpp"

using namespace qthermo;

namespace {
BathSpec unit_bath() { return BathSpec{0.1, 1.0, 1.0}; }
}  // namespace

TEST(Bath, SpectralDensity) {
    const BathSpec b{0.3, 2.0, 1.0};
    EXPECT_NEAR(spectral_density(b, 2.0), 2.0 / M_PI * 0.3 * 4.0 / 8.0, 1e-15);
    EXPECT_EQ(spectral_density(b, 0.0), 0.0);
}

TEST(Bath, DrudeAndFirstMatsubaraAmplitudes) {
    // Reference values evaluated independently at 30 digits.
    const ExponentialSeries s = matsubara_expand(unit_bath(), 3);
    ASSERT_EQ(s.terms.size(), 4u);
    EXPECT_NEAR(s.terms[0].zeta.real(), 0.183048772171245, 1e-14);
    EXPECT_NEAR(s.terms[0].zeta.imag(), -0.1, 1e-15);
    EXPECT_NEAR(s.terms[0].nu, 1.0, 0.0);
    EXPECT_NEAR(s.terms[1].zeta.real(), 0.0653164625612677, 1e-15);
    EXPECT_EQ(s.terms[1].zeta.imag(), 0.0);
    EXPECT_NEAR(s.terms[1].nu, 2 * M_PI, 1e-14);
    EXPECT_NEAR(s.terms[3].nu, 6 * M_PI, 1e-13);
}

TEST(Bath, ZeroCouplingGivesZeroAmplitudes) {
    const ExponentialSeries s = matsubara_expand(BathSpec{0.0, 1.0, 1.0}, 2);
    for (const auto& t : s.terms) EXPECT_EQ(std::abs(t.zeta), 0.0);
}

TEST(Bath, SeriesMatchesIndependentQuadrature) {
    const BathSpec b = unit_bath();
    const ExponentialSeries s = matsubara_expand(b, 400);
    const Complex c = correlation_from_series(s, 1.5);
    EXPECT_NEAR(c.real(), 0.0408489730651903, 1e-8);
    EXPECT_NEAR(c.imag(), -0.0223130160148430, 1e-14);
    const Complex q = correlation_quadrature(b, 1.5);
    EXPECT_NEAR(q.real(), 0.0408489730651903, 1e-10);
    EXPECT_NEAR(q.imag(), -0.0223130160148430, 1e-10);
}

TEST(Bath, ImaginaryPartIsSingleExponential) {
    const BathSpec b{0.06, 10.0, 0.06};
    const ExponentialSeries s = matsubara_expand(b, 2);
    for (const double t : {0.0, 0.1, 0.5}) {
        EXPECT_NEAR(correlation_from_series(s, t).imag(), -0.6 * std::exp(-10.0 * t), 1e-14);
    }
}

TEST(Bath, CorrelationAtZeroTimeIsRejectedByQuadrature) {
    EXPECT_THROW(correlation_quadrature(unit_bath(), 0.0), Error);
}

TEST(Bath, ZeroFrequencyNoiseIsSumOfSeries) {
    const BathSpec b{0.3, 0.5, 5.0};
    const ExponentialSeries s = matsubara_expand(b, 20000);
    double total = 0.0;
    for (const auto& t : s.terms) total += t.zeta.real() / t.nu;
    // Omitted poles contribute about chi w_c beta / (pi^2 K).
    const double tail = 0.3 * 0.5 * 5.0 / (kPi * kPi * 20000);
    EXPECT_NEAR((zero_frequency_noise(b) - total) / tail, 1.0, 1e-3);
    EXPECT_NEAR(zero_frequency_noise(b), 2 * 0.3 / (5.0 * 0.5), 1e-15);
}

TEST(Bath, TailFractionDecreasesWithSeriesLength) {
    const BathSpec b{0.5, 0.8, 0.95};
    double prev = INFINITY;
    for (const int k : {1, 2, 4, 8, 16}) {
        const double f = std::abs(matsubara_tail_fraction(b, matsubara_expand(b, k)));
        EXPECT_LT(f, prev);
        prev = f;
    }
    EXPECT_LE(select_k_max(b, 0.05, 64), 64);
    const int k = select_k_max(b, 0.05, 64);
    EXPECT_LT(std::abs(matsubara_tail_fraction(b, matsubara_expand(b, k))), 0.05);
}

TEST(Bath, DegenerateMatsubaraResonance) {
    // beta w_c = 2 pi puts nu_1 on the Drude pole.
    const BathSpec b{0.1, 1.0, 2 * M_PI};
    try {
        matsubara_expand(b, 2);
        FAIL() << "expected DegenerateMatsubara";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateMatsubara);
    }
}

TEST(Bath, DephasingExponentOracle) {
    // 30-digit oscillatory quadrature of 4 int J coth (1 - cos wt) / w^2.
    EXPECT_NEAR(dephasing_exponent(unit_bath(), 2.0), 0.958969425064984, 1e-7);
    EXPECT_EQ(dephasing_exponent(unit_bath(), 0.0), 0.0);
}

TEST(Bath, DephasingExponentIsMonotoneAtShortTimes) {
    const BathSpec b{0.06, 10.0, 0.25};
    double prev = 0.0;
    for (double t = 0.05; t < 3.0; t += 0.25) {
        const double g = dephasing_exponent(b, t);
        EXPECT_GT(g, prev);
        prev = g;
    }
}

TEST(Bath, WarnsPastSignFlip) {
    EXPECT_TRUE(bath_warnings(BathSpec{0.1, 1.0, 1.0}).empty());
    EXPECT_FALSE(bath_warnings(BathSpec{0.1, 30.0, 0.25}).empty());
}
