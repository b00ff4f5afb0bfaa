#pragma once

#include <string>
#include <vector>

#include "qthermo/types.hpp"

namespace qthermo {

/// Drude-cutoff Ohmic reservoir J(w) = (2/pi) chi w w_c / (w^2 + w_c^2) at
/// inverse temperature beta.
struct BathSpec {
    double chi{0.0};
    double omega_c{1.0};
    double beta{1.0};

    void validate() const;
};

double spectral_density(const BathSpec& b, double omega);

struct ExpTerm {
    Complex zeta;  // amplitude
    double nu;     // decay rate
};

/// C(t) ~ sum_l zeta_l exp(-nu_l t): term 0 is the Drude pole (nu = w_c), terms
/// l >= 1 are Matsubara poles nu_l = 2 pi l / beta.
struct ExponentialSeries {
    std::vector<ExpTerm> terms;

    int k_max() const noexcept { return static_cast<int>(terms.size()) - 1; }
    double max_rate() const noexcept;
};

inline constexpr double kMatsubaraDegeneracyTol = 1e-9;

/// Throws Error(DegenerateMatsubara) when some nu_l (l <= k_max) coincides with
/// w_c within 1e-9 w_c, or when beta w_c / 2 sits on a pole of cot.
ExponentialSeries matsubara_expand(const BathSpec& b, int k_max);

Complex correlation_from_series(const ExponentialSeries& s, double t);

/// Independent evaluation of C(t) from its spectral integral (Ooura Fourier
/// rules). Re C(0) diverges logarithmically for this spectrum, so t = 0 with
/// chi > 0 throws Error(QuadratureNoConvergence).
Complex correlation_quadrature(const BathSpec& b, double t, double rel_tol = 1e-9);

/// int_0^inf Re C(t) dt = pi/2 lim_{w->0} J(w) coth(beta w / 2) = 2 chi / (beta w_c).
double zero_frequency_noise(const BathSpec& b);

/// Fraction of zero_frequency_noise carried by Matsubara terms beyond the series.
double matsubara_tail_fraction(const BathSpec& b, const ExponentialSeries& s);

/// Smallest K with matsubara_tail_fraction below tol, capped at k_cap.
int select_k_max(const BathSpec& b, double tol, int k_cap);

/// Gamma(t) = 4 int_0^inf J(w) coth(beta w / 2) (1 - cos w t) / w^2 dw, the
/// exact coherence decay exponent for a coupling that commutes with H_s.
double dephasing_exponent(const BathSpec& b, double t);

/// Non-fatal observations about a bath configuration (e.g. beta w_c past 2 pi,
/// where the Drude amplitude changes sign).
std::vector<std::string> bath_warnings(const BathSpec& b);

}  // namespace qthermo
