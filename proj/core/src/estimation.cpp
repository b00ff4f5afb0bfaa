#include "qthermo/estimation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <boost/math/tools/roots.hpp>

#include "qthermo/errors.hpp"

namespace qthermo {

BlochVector bloch_from_density(const QubitMatrix& rho, double tol) {
    const double trace_err = std::abs(rho.trace() - 1.0);
    const double herm_err = hermiticity_error(rho);
    if (!(trace_err <= tol) || !(herm_err <= tol)) {
        throw Error(ErrorKind::InvalidDensity, "trace error " + std::to_string(trace_err) + ", hermiticity error " +
                                                   std::to_string(herm_err));
    }
    return {(pauli::x() * rho).trace().real(), (pauli::y() * rho).trace().real(),
            (pauli::z() * rho).trace().real()};
}

QubitMatrix density_from_bloch(const BlochVector& r) {
    return 0.5 * (pauli::identity() + r.x() * pauli::x() + r.y() * pauli::y() + r.z() * pauli::z());
}

double qfi_bloch(const BlochVector& r, const BlochVector& dr) {
    const double dr2 = dr.squaredNorm();
    const double gap = 1.0 - r.squaredNorm();
    const double overlap = r.dot(dr);
    if (gap < kPurityThreshold) {
        if (std::abs(overlap) >= 1e-6) {
            throw Error(ErrorKind::InconsistentPureDerivative,
                        "pure state with r.dr = " + std::to_string(overlap));
        }
        return dr2;
    }
    return dr2 + overlap * overlap / gap;
}

std::array<double, 4> stencil_points(double beta, double delta) {
    return {beta - 2.0 * delta, beta - delta, beta + delta, beta + 2.0 * delta};
}

double finite_diff(const std::function<double(double)>& f, double beta, double delta) {
    if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite-difference step must be positive");
    const auto pts = stencil_points(beta, delta);
    const std::array<double, 4> samples{f(pts[0]), f(pts[1]), f(pts[2]), f(pts[3])};
    return stencil_derivative(samples, delta);
}

namespace {

// Runs job(0..n-1) on up to `threads` workers; rethrows the first failure.
template <typename Job>
void run_parallel(int n, int threads, Job&& job) {
    const int workers = std::clamp(threads, 1, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int i = next++; i < n; i = next++) {
                    try {
                        job(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

OffsetRuns run_offsets(const TrajectorySolver& solver, double beta, double delta_frac, int threads) {
    if (!(beta > 0.0) || !(delta_frac > 0.0) || delta_frac >= 0.25) {
        throw Error(ErrorKind::InvalidArgument, "need beta > 0 and 0 < delta_frac < 1/4");
    }
    OffsetRuns out;
    out.beta = beta;
    out.delta = delta_frac * beta;
    const auto pts = stencil_points(beta, out.delta);
    run_parallel(4, threads, [&](int i) { out.runs[static_cast<std::size_t>(i)] = solver(pts[static_cast<std::size_t>(i)]); });

    const auto& ref = out.runs[0].times;
    for (const auto& run : out.runs) {
        if (run.times.size() != ref.size()) {
            throw Error(ErrorKind::GridMismatch, "offset runs returned different sample counts");
        }
        for (std::size_t k = 0; k < ref.size(); ++k) {
            if (std::abs(run.times[k] - ref[k]) > 1e-12 * std::max(1.0, std::abs(ref[k]))) {
                throw Error(ErrorKind::GridMismatch, "offset runs sampled different times");
            }
        }
    }
    return out;
}

QfiCurve qfi_from_offsets(const OffsetRuns& runs) {
    QfiCurve curve;
    curve.beta = runs.beta;
    curve.delta_frac = runs.delta / runs.beta;
    curve.times = runs.runs[0].times;
    const auto pts = stencil_points(runs.beta, runs.delta);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto& m = runs.runs[i].meta;
        curve.provenance.push_back(m.solver + " beta=" + std::to_string(pts[i]) + " k_max=" + std::to_string(m.k_max) +
                                   " depth=" + std::to_string(m.depth));
    }
    const std::size_t n = curve.times.size();
    curve.values.reserve(n);
    curve.bloch.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::array<BlochVector, 4> r;
        for (std::size_t i = 0; i < 4; ++i) r[i] = bloch_from_density(runs.runs[i].states[k], 1e-6);
        const BlochVector center = stencil_center(r);
        const BlochVector derivative = stencil_derivative(r, runs.delta);
        curve.bloch.push_back(center);
        curve.values.push_back(qfi_bloch(center, derivative));
    }
    return curve;
}

QfiCurve qfi_dynamics(const TrajectorySolver& solver, double beta, double delta_frac, int threads) {
    return qfi_from_offsets(run_offsets(solver, beta, delta_frac, threads));
}

TimedValue max_qfi_over_time(const QfiCurve& curve) {
    if (curve.values.empty()) throw Error(ErrorKind::InvalidArgument, "empty QFI curve");
    std::size_t best = 0;
    for (std::size_t k = 1; k < curve.values.size(); ++k) {
        if (curve.values[k] > curve.values[best]) best = k;
    }
    return {curve.times[best], curve.values[best]};
}

std::vector<std::size_t> local_maxima(const std::vector<double>& values, double rel_prominence) {
    std::vector<std::size_t> peaks;
    if (values.size() < 3) return peaks;
    const double scale = *std::max_element(values.begin(), values.end());
    const double floor = rel_prominence * std::abs(scale);
    // Walk plateaus as single points so flat runs do not count twice.
    std::size_t i = 1;
    while (i + 1 < values.size()) {
        std::size_t j = i;
        while (j + 1 < values.size() && values[j + 1] == values[i]) ++j;
        if (j + 1 >= values.size()) break;
        if (values[i] > values[i - 1] && values[i] > values[j + 1]) {
            // Prominence against the deepest dip to the next higher point on either side.
            double left = values[i - 1];
            for (std::size_t a = i; a-- > 0 && values[a] <= values[i];) left = std::min(left, values[a]);
            double right = values[j + 1];
            for (std::size_t b = j + 1; b < values.size() && values[b] <= values[i]; ++b) right = std::min(right, values[b]);
            if (values[i] - std::max(left, right) > floor) peaks.push_back(i);
        }
        i = j + 1;
    }
    return peaks;
}

std::vector<double> error_propagation_variance(const OffsetRuns& runs, const QubitMatrix& observable) {
    if (hermiticity_error(observable) > 1e-12) {
        throw Error(ErrorKind::InvalidArgument, "observable must be Hermitian");
    }
    // O = o0 I + o.sigma, so <O> = o0 + o.r and Var(O) = |o|^2 - (o.r)^2 exactly;
    // the identity part then carries no finite-difference noise.
    const BlochVector o(observable(0, 1).real(), -observable(0, 1).imag(),
                        0.5 * (observable(0, 0).real() - observable(1, 1).real()));
    const std::size_t n = runs.runs[0].size();
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::array<BlochVector, 4> r;
        for (std::size_t i = 0; i < 4; ++i) r[i] = bloch_from_density(runs.runs[i].states[k], 1e-6);
        const double m = o.dot(stencil_center(r));
        const double variance = std::max(0.0, o.squaredNorm() - m * m);
        const double slope = o.dot(stencil_derivative(r, runs.delta));
        out[k] = std::abs(slope) < 1e-12 ? std::numeric_limits<double>::infinity() : variance / (slope * slope);
    }
    return out;
}

BlochVector gibbs_bloch(const SensorParams& p, double beta) {
    const double omega = p.rabi_frequency();
    if (omega == 0.0) return BlochVector::Zero();
    return -std::tanh(0.5 * beta * omega) / omega * BlochVector(p.delta, 0.0, p.epsilon);
}

BlochVector gibbs_bloch_derivative(const SensorParams& p, double beta) {
    const double omega = p.rabi_frequency();
    const double c = std::cosh(0.5 * beta * omega);
    return -0.5 / (c * c) * BlochVector(p.delta, 0.0, p.epsilon);
}

QubitMatrix gibbs_state(const SensorParams& p, double beta) {
    if (!(beta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be nonnegative");
    return density_from_bloch(gibbs_bloch(p, beta));
}

double gibbs_qfi(double omega, double beta) {
    const double c = std::cosh(0.5 * beta * omega);
    return 0.25 * omega * omega / (c * c);
}

double omega_star_x() {
    static const double root = [] {
        const auto f = [](double x) { return x * std::sinh(x) - 2.0 * (1.0 + std::cosh(x)); };
        std::uintmax_t iterations = 200;
        const auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::max(1.0, std::abs(a)); };
        const auto bracket = boost::math::tools::toms748_solve(f, 1.0, 5.0, tol, iterations);
        return 0.5 * (bracket.first + bracket.second);
    }();
    return root;
}

double omega_star(double beta) {
    if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
    return omega_star_x() / beta;
}

const char* to_string(PopulationBasis basis) noexcept {
    return basis == PopulationBasis::Eigen ? "eigen" : "sigma_z";
}

double population_ratio(const QubitMatrix& rho, const SensorParams& p, PopulationBasis basis) {
    double lower = 0.0;
    double upper = 0.0;
    if (basis == PopulationBasis::Eigen) {
        const Eigenbasis eb = sensor_eigenbasis(p);
        lower = (eb.vectors.col(0).adjoint() * rho * eb.vectors.col(0))(0, 0).real();
        upper = (eb.vectors.col(1).adjoint() * rho * eb.vectors.col(1))(0, 0).real();
    } else {
        lower = rho(1, 1).real();
        upper = rho(0, 0).real();
    }
    if (!(lower > 1e-12) || !(upper > 1e-12)) {
        throw Error(ErrorKind::DegeneratePopulation,
                    "populations " + std::to_string(lower) + " / " + std::to_string(upper));
    }
    return lower / upper;
}

double renormalized_frequency_from_steady(const QubitMatrix& rho_inf, const SensorParams& p, double beta,
                                          PopulationBasis basis) {
    if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
    return std::log(population_ratio(rho_inf, p, basis)) / beta;
}

SteadyQfi steady_qfi(const SteadySolver& solver, double beta, double delta_frac, int threads) {
    if (!(beta > 0.0) || !(delta_frac > 0.0)) throw Error(ErrorKind::InvalidArgument, "need beta > 0, delta_frac > 0");
    const double delta = delta_frac * beta;
    const auto pts = stencil_points(beta, delta);
    std::array<QubitMatrix, 4> rho;
    run_parallel(4, threads, [&](int i) { rho[static_cast<std::size_t>(i)] = solver(pts[static_cast<std::size_t>(i)]); });
    std::array<BlochVector, 4> r;
    for (std::size_t i = 0; i < 4; ++i) r[i] = bloch_from_density(rho[i], 1e-6);
    SteadyQfi out;
    out.rho = stencil_center(rho);
    out.qfi = qfi_bloch(stencil_center(r), stencil_derivative(r, delta));
    return out;
}

}  // namespace qthermo
