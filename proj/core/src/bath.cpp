#include "qthermo/bath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qthermo/errors.hpp"
#include "qthermo/quadrature.hpp"

namespace qthermo {

void BathSpec::validate() const {
    if (!(chi >= 0.0) || !std::isfinite(chi)) {
        throw Error(ErrorKind::InvalidArgument, "chi must be non-negative");
    }
    if (!(omega_c > 0.0) || !std::isfinite(omega_c)) {
        throw Error(ErrorKind::InvalidArgument, "omega_c must be positive");
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw Error(ErrorKind::InvalidArgument, "beta must be positive");
    }
}

double spectral_density(const BathSpec& b, double omega) {
    return 2.0 / kPi * b.chi * omega * b.omega_c / (omega * omega + b.omega_c * b.omega_c);
}

double ExponentialSeries::max_rate() const noexcept {
    double m = 0.0;
    for (const auto& term : terms) m = std::max(m, term.nu);
    return m;
}

ExponentialSeries matsubara_expand(const BathSpec& b, int k_max) {
    b.validate();
    if (k_max < 0) throw Error(ErrorKind::InvalidArgument, "k_max must be >= 0");

    const double half = 0.5 * b.beta * b.omega_c;
    if (std::abs(std::sin(half)) < kMatsubaraDegeneracyTol) {
        throw Error(ErrorKind::DegenerateMatsubara,
                    "beta*omega_c is a multiple of 2 pi; cot(beta omega_c / 2) is singular");
    }

    ExponentialSeries s;
    s.terms.reserve(static_cast<std::size_t>(k_max) + 1);
    const double scale = b.chi * b.omega_c;
    s.terms.push_back({Complex(scale / std::tan(half), -scale), b.omega_c});
    for (int l = 1; l <= k_max; ++l) {
        const double nu = 2.0 * kPi * l / b.beta;
        if (std::abs(nu - b.omega_c) < kMatsubaraDegeneracyTol * b.omega_c) {
            throw Error(ErrorKind::DegenerateMatsubara,
                        "Matsubara frequency " + std::to_string(l) + " coincides with omega_c");
        }
        const double zeta = 4.0 * scale / b.beta * nu / (nu * nu - b.omega_c * b.omega_c);
        s.terms.push_back({Complex(zeta, 0.0), nu});
    }
    return s;
}

Complex correlation_from_series(const ExponentialSeries& s, double t) {
    Complex c{0.0, 0.0};
    for (const auto& term : s.terms) c += term.zeta * std::exp(-term.nu * t);
    return c;
}

Complex correlation_quadrature(const BathSpec& b, double t, double rel_tol) {
    b.validate();
    if (t < 0.0) throw Error(ErrorKind::InvalidArgument, "t must be >= 0");
    if (b.chi == 0.0) return {0.0, 0.0};
    if (t == 0.0) {
        throw Error(ErrorKind::QuadratureNoConvergence,
                    "Re C(0) = int J(w) coth(beta w/2) dw diverges logarithmically");
    }
    const auto noisy = [&b](double w) { return spectral_density(b, w) / std::tanh(0.5 * b.beta * w); };
    const auto plain = [&b](double w) { return spectral_density(b, w); };
    // Absolute floor at the bath's own amplitude scale, so the exponentially
    // small tail at long times does not demand full relative accuracy.
    const double floor = rel_tol * b.chi * b.omega_c * (1.0 + 2.0 / (b.beta * b.omega_c));
    const double re = quad::fourier_cos(noisy, t, rel_tol, floor).value;
    const double im = -quad::fourier_sin(plain, t, rel_tol, floor).value;
    return {re, im};
}

double zero_frequency_noise(const BathSpec& b) { return 2.0 * b.chi / (b.beta * b.omega_c); }

double matsubara_tail_fraction(const BathSpec& b, const ExponentialSeries& s) {
    const double total = zero_frequency_noise(b);
    if (total == 0.0) return 0.0;
    double kept = 0.0;
    for (const auto& term : s.terms) kept += term.zeta.real() / term.nu;
    return std::abs(total - kept) / std::abs(total);
}

int select_k_max(const BathSpec& b, double tol, int k_cap) {
    if (b.chi == 0.0) return 0;
    // Tail fraction is monotone in K once nu_K > omega_c; scanning is cheap.
    const ExponentialSeries full = matsubara_expand(b, k_cap);
    const double total = zero_frequency_noise(b);
    double kept = 0.0;
    for (int k = 0; k <= k_cap; ++k) {
        const auto& term = full.terms[static_cast<std::size_t>(k)];
        kept += term.zeta.real() / term.nu;
        if (std::abs(total - kept) < tol * std::abs(total)) return k;
    }
    return k_cap;
}

double dephasing_exponent(const BathSpec& b, double t) {
    b.validate();
    if (t < 0.0) throw Error(ErrorKind::InvalidArgument, "t must be >= 0");
    if (t == 0.0 || b.chi == 0.0) return 0.0;

    // 8 J coth sin^2(w t/2) / w^2 on [0, W] by panels; beyond W the oscillating
    // half averages out (|tail| <= 16 chi w_c / (pi t W^3)) and only the smooth
    // 4 J coth / w^2 remains.
    const double w_cut = std::max({200.0 * b.omega_c, 200.0 / b.beta, 2000.0 / t});
    const auto body = [&b, t](double w) {
        const double s = std::sin(0.5 * w * t);
        return 8.0 * spectral_density(b, w) / std::tanh(0.5 * b.beta * w) * s * s / (w * w);
    };
    const auto tail = [&b](double w) {
        return 4.0 * spectral_density(b, w) / std::tanh(0.5 * b.beta * w) / (w * w);
    };
    const double panel = 4.0 * kPi / t;
    const double head = quad::integrate_panels(body, 0.0, w_cut, panel, 1e-11, 1e-15).value;
    const double rest = quad::integrate(tail, w_cut, std::numeric_limits<double>::infinity(), 1e-11, 1e-15).value;
    return head + rest;
}

std::vector<std::string> bath_warnings(const BathSpec& b) {
    std::vector<std::string> out;
    if (b.beta * b.omega_c > 2.0 * kPi) {
        out.push_back("beta*omega_c exceeds 2 pi: Re(zeta_0) has flipped sign (cot branch)");
    }
    return out;
}

}  // namespace qthermo
