#include "qthermo/heom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <unordered_map>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#ifdef QTHERMO_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "qthermo/errors.hpp"

namespace qthermo {

std::vector<double> sigma_z_expectation(const Trajectory& traj) {
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& rho : traj.states) out.push_back((rho(0, 0) - rho(1, 1)).real());
    return out;
}

namespace heom {

std::size_t index_count(int n_terms, int depth) {
    // binomial(depth + n_terms, n_terms), computed incrementally to stay exact.
    const auto n = static_cast<std::size_t>(n_terms);
    std::size_t c = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        const std::size_t num = static_cast<std::size_t>(depth) + i;
        if (c > std::numeric_limits<std::size_t>::max() / num) return std::numeric_limits<std::size_t>::max();
        c = c * num / i;
    }
    return c;
}

namespace {

std::u16string key_of(std::span<const std::uint16_t> nu) {
    std::u16string k(nu.size(), u'\0');
    for (std::size_t i = 0; i < nu.size(); ++i) k[i] = static_cast<char16_t>(nu[i]);
    return k;
}

// Compositions of `total` into nu.size() parts, largest leading entries first.
template <typename Visit>
void compositions(std::vector<std::uint16_t>& nu, std::size_t slot, int total, Visit&& visit) {
    if (slot + 1 == nu.size()) {
        nu[slot] = static_cast<std::uint16_t>(total);
        visit(nu);
        return;
    }
    for (int v = total; v >= 0; --v) {
        nu[slot] = static_cast<std::uint16_t>(v);
        compositions(nu, slot + 1, total - v, visit);
    }
}

}  // namespace

HierarchyLayout::HierarchyLayout(int n_terms, int depth, std::size_t cap)
    : n_terms_(n_terms), depth_(depth) {
    if (n_terms < 1) throw Error(ErrorKind::InvalidArgument, "hierarchy needs at least one bath term");
    if (depth < 0 || depth > 60000) throw Error(ErrorKind::InvalidArgument, "invalid hierarchy depth");
    const std::size_t count = index_count(n_terms, depth);
    if (count > cap) {
        throw Error(ErrorKind::HierarchyTooLarge, std::to_string(count) + " auxiliary matrices exceed the cap of " +
                                                      std::to_string(cap));
    }
    const auto n = static_cast<std::size_t>(n_terms);
    indices_.reserve(count * n);
    tier_.reserve(count);

    std::unordered_map<std::u16string, std::int32_t> lookup;
    lookup.reserve(count);
    std::vector<std::uint16_t> nu(n, 0);
    for (int t = 0; t <= depth; ++t) {
        compositions(nu, 0, t, [&](const std::vector<std::uint16_t>& v) {
            lookup.emplace(key_of(v), static_cast<std::int32_t>(tier_.size()));
            indices_.insert(indices_.end(), v.begin(), v.end());
            tier_.push_back(t);
        });
    }

    up_.assign(count * n, kNone);
    down_.assign(count * n, kNone);
    std::vector<std::uint16_t> probe(n);
    for (std::size_t i = 0; i < count; ++i) {
        const auto base = index(i);
        for (std::size_t l = 0; l < n; ++l) {
            std::copy(base.begin(), base.end(), probe.begin());
            if (tier_[i] < depth) {
                ++probe[l];
                up_[i * n + l] = lookup.at(key_of(probe));
                --probe[l];
            }
            if (probe[l] > 0) {
                --probe[l];
                down_[i * n + l] = lookup.at(key_of(probe));
            }
        }
    }
}

std::int32_t HierarchyLayout::find(std::span<const std::uint16_t> nu) const {
    if (nu.size() != static_cast<std::size_t>(n_terms_)) return kNone;
    int total = 0;
    for (auto v : nu) total += v;
    if (total > depth_) return kNone;
    // Walk down from the target to the root through the neighbour tables.
    std::vector<std::uint16_t> cur(nu.begin(), nu.end());
    std::vector<int> path;
    for (std::size_t l = 0; l < cur.size(); ++l) {
        while (cur[l] > 0) {
            path.push_back(static_cast<int>(l));
            --cur[l];
        }
    }
    std::int32_t pos = 0;
    for (auto it = path.rbegin(); it != path.rend(); ++it) pos = up(static_cast<std::size_t>(pos), *it);
    return pos;
}

HierarchyState build_hierarchy(const ExponentialSeries& series, int depth, const QubitMatrix& rho0,
                               std::size_t cap) {
    if (depth < 1) throw Error(ErrorKind::InvalidArgument, "hierarchy depth must be >= 1");
    if (series.terms.empty()) throw Error(ErrorKind::InvalidArgument, "empty bath series");
    if (std::abs(rho0.trace() - 1.0) > 1e-10 || hermiticity_error(rho0) > 1e-10) {
        throw Error(ErrorKind::InvalidDensity, "initial state must be a unit-trace Hermitian matrix");
    }
    HierarchyState state;
    state.layout = std::make_shared<const HierarchyLayout>(static_cast<int>(series.terms.size()), depth, cap);
    state.aux.assign(state.layout->size(), QubitMatrix::Zero());
    state.aux[0] = rho0;
    return state;
}

double markovian_tail_weight(const BathSpec& bath, const ExponentialSeries& series) {
    double kept = 0.0;
    for (const auto& term : series.terms) kept += term.zeta.real() / term.nu;
    return zero_frequency_noise(bath) - kept;
}

namespace {

struct Coefficients {
    std::vector<double> damping;  // nu . mu per index
    std::vector<double> re_zeta;
    std::vector<double> im_zeta;
    std::vector<double> up_scale;    // per term, multiplies sqrt(nu_l + 1)
    std::vector<double> down_scale;  // per term, multiplies sqrt(nu_l)
    std::vector<double> root;        // sqrt(n) for n <= depth + 1
    bool rescaled{false};
};

Coefficients coefficients(const HierarchyLayout& layout, const Problem& problem) {
    const ExponentialSeries& series = problem.series;
    Coefficients c;
    c.rescaled = problem.rescaled;
    const auto n = static_cast<std::size_t>(layout.n_terms());
    c.damping.resize(layout.size());
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto nu = layout.index(i);
        double g = 0.0;
        for (std::size_t l = 0; l < n; ++l) g += nu[l] * series.terms[l].nu;
        c.damping[i] = g;
    }
    for (const auto& term : series.terms) {
        c.re_zeta.push_back(term.zeta.real());
        c.im_zeta.push_back(term.zeta.imag());
        const double mag = std::abs(term.zeta) > 0.0 ? std::abs(term.zeta) : 1.0;
        c.up_scale.push_back(std::sqrt(mag));
        c.down_scale.push_back(1.0 / std::sqrt(mag));
    }
    for (int k = 0; k <= layout.depth() + 1; ++k) c.root.push_back(std::sqrt(static_cast<double>(k)));
    return c;
}

void rhs_range(const HierarchyLayout& layout, const Problem& problem, const Coefficients& coef,
               std::span<const QubitMatrix> y, std::span<QubitMatrix> dy, std::size_t begin, std::size_t end) {
    const QubitMatrix& h = problem.hamiltonian;
    const QubitMatrix& s = problem.coupling;
    const int n = layout.n_terms();
    for (std::size_t i = begin; i < end; ++i) {
        const QubitMatrix& rho = y[i];
        QubitMatrix d = -kI * commutator(h, rho) - coef.damping[i] * rho;
        if (problem.tail_weight != 0.0) d -= problem.tail_weight * commutator(s, commutator(s, rho));

        QubitMatrix up_sum = QubitMatrix::Zero();
        QubitMatrix re_sum = QubitMatrix::Zero();
        QubitMatrix im_sum = QubitMatrix::Zero();
        bool any_up = false;
        bool any_down = false;
        const auto nu = layout.index(i);
        for (int l = 0; l < n; ++l) {
            const std::int32_t u = layout.up(i, l);
            const auto ul = static_cast<std::size_t>(l);
            if (u != HierarchyLayout::kNone) {
                if (coef.rescaled) up_sum += (coef.root[nu[ul] + 1u] * coef.up_scale[ul]) * y[static_cast<std::size_t>(u)];
                else up_sum += y[static_cast<std::size_t>(u)];
                any_up = true;
            }
            const std::int32_t w = layout.down(i, l);
            if (w != HierarchyLayout::kNone) {
                const double count = coef.rescaled ? coef.root[nu[ul]] * coef.down_scale[ul] : nu[ul];
                re_sum += (count * coef.re_zeta[static_cast<std::size_t>(l)]) * y[static_cast<std::size_t>(w)];
                if (coef.im_zeta[static_cast<std::size_t>(l)] != 0.0) {
                    im_sum += (count * coef.im_zeta[static_cast<std::size_t>(l)]) * y[static_cast<std::size_t>(w)];
                }
                any_down = true;
            }
        }
        if (any_up) d -= kI * commutator(s, up_sum);
        // Theta rho = -i Re(zeta) [S, rho] + Im(zeta) {S, rho}
        if (any_down) d += -kI * commutator(s, re_sum) + anticommutator(s, im_sum);
        dy[i] = d;
    }
}

constexpr std::size_t kMinParallelIndices = 512;

void rhs_impl(const HierarchyLayout& layout, const Problem& problem, const Coefficients& coef,
              std::span<const QubitMatrix> y, std::span<QubitMatrix> dy, int threads) {
    const std::size_t n = layout.size();
    const auto workers = static_cast<std::size_t>(std::max(threads, 1));
    if (workers == 1 || n < kMinParallelIndices) {
        rhs_range(layout, problem, coef, y, dy, 0, n);
        return;
    }
    // Each worker owns a contiguous block of outputs; no cross-thread reduction,
    // so the result is independent of the worker count.
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t b = std::min(n, w * chunk);
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&, b, e] { rhs_range(layout, problem, coef, y, dy, b, e); });
    }
    rhs_range(layout, problem, coef, y, dy, 0, std::min(n, chunk));
}

void check_consistency(const HierarchyLayout& layout, const Problem& problem) {
    if (static_cast<std::size_t>(layout.n_terms()) != problem.series.terms.size()) {
        throw Error(ErrorKind::InvalidArgument, "hierarchy layout and bath series disagree on the number of terms");
    }
}

class Rk4 {
public:
    Rk4(const HierarchyLayout& layout, const Problem& problem, int threads)
        : layout_(layout), problem_(problem), coef_(coefficients(layout, problem)), threads_(threads),
          k1_(layout.size()), k2_(layout.size()), k3_(layout.size()), k4_(layout.size()), tmp_(layout.size()) {}

    void step(std::vector<QubitMatrix>& y, double dt) {
        const std::size_t n = y.size();
        rhs_impl(layout_, problem_, coef_, y, k1_, threads_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + (0.5 * dt) * k1_[i];
        rhs_impl(layout_, problem_, coef_, tmp_, k2_, threads_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + (0.5 * dt) * k2_[i];
        rhs_impl(layout_, problem_, coef_, tmp_, k3_, threads_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + dt * k3_[i];
        rhs_impl(layout_, problem_, coef_, tmp_, k4_, threads_);
        const double w = dt / 6.0;
        for (std::size_t i = 0; i < n; ++i) y[i] += w * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }

private:
    const HierarchyLayout& layout_;
    const Problem& problem_;
    Coefficients coef_;
    int threads_;
    std::vector<QubitMatrix> k1_, k2_, k3_, k4_, tmp_;
};

double max_abs(const std::vector<QubitMatrix>& y) {
    double m = 0.0;
    for (const auto& a : y) {
        if (!a.allFinite()) return std::numeric_limits<double>::infinity();
        m = std::max(m, a.cwiseAbs().maxCoeff());
    }
    return m;
}

void guard(const std::vector<QubitMatrix>& y, double bound, double t) {
    const double m = max_abs(y);
    if (!std::isfinite(m) || m > bound) {
        throw Error(ErrorKind::StepInstability,
                    "auxiliary norm " + std::to_string(m) + " exceeded bound at t = " + std::to_string(t));
    }
}

double resolve_step(const Problem& problem, int depth, const PropagationOptions& opts) {
    const double dt = opts.dt > 0.0 ? opts.dt : default_step(problem, depth);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::InvalidArgument, "invalid time step");
    return dt;
}

// Compares N steps of dt against 2N steps of dt/2 from the same start.
double step_self_check(const HierarchyState& state, const Problem& problem, double dt, int steps, int threads) {
    const auto& layout = *state.layout;
    std::vector<QubitMatrix> coarse = state.aux;
    std::vector<QubitMatrix> fine = state.aux;
    Rk4 rk(layout, problem, threads);
    for (int i = 0; i < steps; ++i) rk.step(coarse, dt);
    for (int i = 0; i < 2 * steps; ++i) rk.step(fine, 0.5 * dt);
    return (coarse[0] - fine[0]).cwiseAbs().maxCoeff();
}

constexpr int kSelfCheckSteps = 100;
constexpr int kGuardInterval = 64;

}  // namespace

void hierarchy_rhs(const HierarchyLayout& layout, const Problem& problem, std::span<const QubitMatrix> state,
                   std::span<QubitMatrix> derivative, int threads) {
    check_consistency(layout, problem);
    if (state.size() != layout.size() || derivative.size() != layout.size()) {
        throw Error(ErrorKind::InvalidArgument, "state size does not match the hierarchy layout");
    }
    rhs_impl(layout, problem, coefficients(layout, problem), state, derivative, threads);
}

std::vector<QubitMatrix> hierarchy_rhs(const HierarchyState& state, const Problem& problem) {
    std::vector<QubitMatrix> d(state.aux.size());
    hierarchy_rhs(*state.layout, problem, state.aux, d, 1);
    return d;
}

double default_step(const Problem& problem, int depth, double safety) {
    const QubitMatrix& h = problem.hamiltonian;
    const double gap = std::sqrt(std::norm(h(0, 0) - h(1, 1)) + 4.0 * std::norm(h(0, 1)));
    const int l = std::max(depth, 1);
    // Row-sum bound on the tier couplings: |[S, .]| <= 2|S| and, by
    // Cauchy-Schwarz, sum_l sqrt((n_l + 1)|zeta_l|) <= sqrt((L + K + 1) sum |zeta|).
    double zeta_sum = 0.0;
    for (const auto& term : problem.series.terms) zeta_sum += std::abs(term.zeta);
    const double s_norm = problem.coupling.cwiseAbs().rowwise().sum().maxCoeff();
    const auto n_terms = static_cast<double>(problem.series.terms.size());
    const double coupling = 4.0 * s_norm * std::sqrt((l + n_terms) * zeta_sum);
    const double tail = 4.0 * s_norm * s_norm * std::abs(problem.tail_weight);
    const double fastest = std::max(gap, problem.series.max_rate() * l) + coupling + tail;
    return safety / std::max(fastest, 1e-12);
}

Trajectory propagate(HierarchyState& state, const Problem& problem, double t_end, const PropagationOptions& opts) {
    const auto& layout = *state.layout;
    check_consistency(layout, problem);
    if (opts.stride < 1) throw Error(ErrorKind::InvalidArgument, "stride must be >= 1");
    const double t0 = state.time;
    if (t_end < t0) throw Error(ErrorKind::InvalidArgument, "t_end precedes the current time");

    double dt = resolve_step(problem, layout.depth(), opts);
    long steps = 0;
    if (opts.dt > 0.0) {
        steps = static_cast<long>(std::llround((t_end - t0) / dt));
        if (std::abs(static_cast<double>(steps) * dt - (t_end - t0)) > 1e-9 * std::max(1.0, t_end)) {
            throw Error(ErrorKind::InvalidArgument, "t_end - t0 must be an integer multiple of dt");
        }
    } else if (t_end > t0) {
        // Shrink the default step so the interval splits evenly.
        steps = static_cast<long>(std::ceil((t_end - t0) / dt - 1e-9));
        dt = (t_end - t0) / static_cast<double>(steps);
    }

    Trajectory traj;
    traj.meta.solver = "heom";
    traj.meta.k_max = layout.n_terms() - 1;
    traj.meta.depth = layout.depth();
    traj.meta.dt = dt;
    traj.meta.stride = opts.stride;
    traj.meta.markovian_tail = problem.tail_weight != 0.0;
    if (opts.self_check && steps > 0) {
        const int n = static_cast<int>(std::min<long>(steps, kSelfCheckSteps));
        traj.meta.step_check_deviation = step_self_check(state, problem, dt, n, opts.threads);
        if (!(traj.meta.step_check_deviation <= opts.self_check_tol)) {
            throw Error(ErrorKind::StepInstability, "step self-check deviation " +
                                                        std::to_string(traj.meta.step_check_deviation) +
                                                        " exceeds tolerance at dt = " + std::to_string(dt));
        }
    }

    Rk4 rk(layout, problem, opts.threads);
    traj.record(t0, state.aux[0]);
    for (long k = 1; k <= steps; ++k) {
        rk.step(state.aux, dt);
        state.time = t0 + static_cast<double>(k) * dt;
        if (k % kGuardInterval == 0 || k == steps) guard(state.aux, opts.divergence_bound, state.time);
        if (k % opts.stride == 0) traj.record(state.time, state.aux[0]);
    }
    return traj;
}

SteadyState steady_state(HierarchyState& state, const Problem& problem, const SteadyStateOptions& ss,
                         const PropagationOptions& opts) {
    const auto& layout = *state.layout;
    check_consistency(layout, problem);
    if (!(ss.window > 0.0) || !(ss.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "invalid steady-state options");
    const double dt = resolve_step(problem, layout.depth(), opts);
    const long per_window = std::max(1L, static_cast<long>(std::llround(ss.window / dt)));

    SteadyState out;
    out.dt = dt;
    if (opts.self_check) {
        const double dev = step_self_check(state, problem, dt, kSelfCheckSteps, opts.threads);
        if (!(dev <= opts.self_check_tol)) {
            throw Error(ErrorKind::StepInstability, "step self-check deviation " + std::to_string(dev));
        }
    }

    Rk4 rk(layout, problem, opts.threads);
    const double t0 = state.time;
    QubitMatrix previous = state.aux[0];
    long k = 0;
    while (true) {
        for (long j = 0; j < per_window; ++j) {
            rk.step(state.aux, dt);
            ++k;
            if (k % kGuardInterval == 0) guard(state.aux, opts.divergence_bound, t0 + k * dt);
        }
        state.time = t0 + static_cast<double>(k) * dt;
        guard(state.aux, opts.divergence_bound, state.time);
        out.residual = (state.aux[0] - previous).cwiseAbs().maxCoeff();
        previous = state.aux[0];
        if (out.residual < ss.tol) break;
        if (state.time - t0 >= ss.max_time) {
            throw Error(ErrorKind::NoSteadyState, "windowed change " + std::to_string(out.residual) +
                                                      " still above tolerance at t = " + std::to_string(state.time));
        }
    }
    out.rho = state.aux[0];
    out.time = state.time;
    return out;
}

namespace {

using Super = Eigen::Matrix<Complex, 4, 4>;

// Matrix of X -> f(X) on row-major vec(X).
template <typename F>
Super superoperator(F&& f) {
    Super m;
    for (int k = 0; k < 4; ++k) {
        QubitMatrix e = QubitMatrix::Zero();
        e(k / 2, k % 2) = 1.0;
        const QubitMatrix y = f(e);
        for (int j = 0; j < 4; ++j) m(j, k) = y(j / 2, j % 2);
    }
    return m;
}

}  // namespace

SteadyState steady_state_direct(const HierarchyLayout& layout, const Problem& problem) {
    check_consistency(layout, problem);
    const Coefficients coef = coefficients(layout, problem);
    const QubitMatrix& h = problem.hamiltonian;
    const QubitMatrix& s = problem.coupling;
    const double w = problem.tail_weight;
    const Super self = superoperator([&](const QubitMatrix& x) {
        QubitMatrix d = -kI * commutator(h, x);
        if (w != 0.0) d -= w * commutator(s, commutator(s, x));
        return d;
    });
    const Super comm = superoperator([&](const QubitMatrix& x) { return QubitMatrix(-kI * commutator(s, x)); });
    const Super anti = superoperator([&](const QubitMatrix& x) { return anticommutator(s, x); });

    const std::size_t n_aux = layout.size();
    const auto dim = static_cast<Eigen::Index>(4 * n_aux);
    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(16 * n_aux * static_cast<std::size_t>(1 + 2 * layout.n_terms()));
    const auto add_block = [&](std::size_t row, std::size_t col, const Super& b) {
        for (int j = 0; j < 4; ++j) {
            // Row 0 (rho_0 element 00) is redundant with the trace; it becomes the normalisation.
            if (row == 0 && j == 0) continue;
            for (int k = 0; k < 4; ++k) {
                if (b(j, k) != Complex(0.0)) {
                    triplets.emplace_back(static_cast<Eigen::Index>(4 * row + j), static_cast<Eigen::Index>(4 * col + k),
                                          b(j, k));
                }
            }
        }
    };
    for (std::size_t i = 0; i < n_aux; ++i) {
        add_block(i, i, self - coef.damping[i] * Super::Identity());
        const auto nu = layout.index(i);
        for (int l = 0; l < layout.n_terms(); ++l) {
            const auto ul = static_cast<std::size_t>(l);
            const std::int32_t u = layout.up(i, l);
            if (u != HierarchyLayout::kNone) {
                const double a = coef.rescaled ? coef.root[nu[ul] + 1u] * coef.up_scale[ul] : 1.0;
                add_block(i, static_cast<std::size_t>(u), a * comm);
            }
            const std::int32_t dn = layout.down(i, l);
            if (dn != HierarchyLayout::kNone) {
                const double count = coef.rescaled ? coef.root[nu[ul]] * coef.down_scale[ul] : nu[ul];
                add_block(i, static_cast<std::size_t>(dn), (count * coef.re_zeta[ul]) * comm +
                                                                (count * coef.im_zeta[ul]) * anti);
            }
        }
    }
    triplets.emplace_back(0, 0, Complex(1.0));
    triplets.emplace_back(0, 3, Complex(1.0));

    Eigen::SparseMatrix<Complex> a(dim, dim);
    a.setFromTriplets(triplets.begin(), triplets.end());
#ifdef QTHERMO_HAVE_UMFPACK
    Eigen::UmfPackLU<Eigen::SparseMatrix<Complex>> lu;
#else
    Eigen::SparseLU<Eigen::SparseMatrix<Complex>, Eigen::COLAMDOrdering<int>> lu;
#endif
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw Error(ErrorKind::NoSteadyState,
                    "factorising the hierarchy generator failed: no unique stationary state, or the LU fill "
                    "exhausted memory");
    }
    Eigen::VectorX<Complex> rhs = Eigen::VectorX<Complex>::Zero(dim);
    rhs(0) = 1.0;
    const Eigen::VectorX<Complex> x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        throw Error(ErrorKind::NoSteadyState, "sparse solve for the stationary hierarchy failed");
    }

    std::vector<QubitMatrix> aux(n_aux);
    for (std::size_t i = 0; i < n_aux; ++i) {
        for (int j = 0; j < 4; ++j) aux[i](j / 2, j % 2) = x(static_cast<Eigen::Index>(4 * i + j));
    }
    std::vector<QubitMatrix> d(n_aux);
    rhs_impl(layout, problem, coef, aux, d, 1);
    SteadyState out;
    out.rho = aux[0];
    out.residual = max_abs(d);
    // A near-singular generator shows up as a large residual rather than a failed factorisation.
    if (!(out.residual < 1e-8 * std::max(1.0, max_abs(aux)))) {
        throw Error(ErrorKind::NoSteadyState,
                    "stationary hierarchy residual " + std::to_string(out.residual) + " too large");
    }
    return out;
}

ConvergenceReport convergence_sweep(const LevelProbe& probe, const std::vector<int>& k_values,
                                    const std::vector<int>& depth_values, double tol) {
    if (k_values.empty() || depth_values.empty()) {
        throw Error(ErrorKind::InvalidArgument, "convergence sweep ranges must be non-empty");
    }
    const std::size_t nk = k_values.size();
    const std::size_t nl = depth_values.size();
    std::vector<std::vector<double>> samples(nk * nl);
    for (std::size_t a = 0; a < nk; ++a) {
        for (std::size_t b = 0; b < nl; ++b) samples[a * nl + b] = probe(k_values[a], depth_values[b]);
    }
    auto deviation = [&](std::size_t p, std::size_t q) {
        const auto& x = samples[p];
        const auto& y = samples[q];
        if (x.size() != y.size()) throw Error(ErrorKind::GridMismatch, "probe returned different sample counts");
        double m = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
        return m;
    };

    ConvergenceReport report;
    report.tol = tol;
    for (std::size_t a = 0; a < nk; ++a) {
        for (std::size_t b = 0; b < nl; ++b) {
            ConvergenceLevel level;
            level.k_max = k_values[a];
            level.depth = depth_values[b];
            level.n_aux = index_count(k_values[a] + 1, depth_values[b]);
            if (b > 0) level.dev_depth = deviation(a * nl + b, a * nl + b - 1);
            if (a > 0) level.dev_k = deviation(a * nl + b, (a - 1) * nl + b);
            report.levels.push_back(level);
        }
    }
    // A level is resolved when stepping up in either direction changes the probe by < tol.
    for (std::size_t a = 0; a < nk && !report.converged; ++a) {
        for (std::size_t b = 0; b < nl; ++b) {
            const bool k_ok = nk == 1 || (a + 1 < nk && deviation((a + 1) * nl + b, a * nl + b) < tol);
            const bool l_ok = nl == 1 || (b + 1 < nl && deviation(a * nl + b + 1, a * nl + b) < tol);
            if (k_ok && l_ok) {
                report.converged = true;
                report.k_max = k_values[a];
                report.depth = depth_values[b];
                break;
            }
        }
    }
    if (!report.converged) {
        report.k_max = k_values.back();
        report.depth = depth_values.back();
    }
    return report;
}

}  // namespace heom
}  // namespace qthermo
