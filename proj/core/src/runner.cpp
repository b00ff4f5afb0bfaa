#include "qthermo/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "qthermo/estimation.hpp"
#include "qthermo/heom.hpp"
#include "qthermo/polaron.hpp"
#include "qthermo/workflows.hpp"

#ifndef QTHERMO_VERSION
#define QTHERMO_VERSION "0.0.0"
#endif

namespace qthermo::cli {

using nlohmann::json;

std::string software_version() { return QTHERMO_VERSION; }

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::InvalidArgument:
        case ErrorKind::HierarchyTooLarge: return 2;
        case ErrorKind::QuadratureNoConvergence:
        case ErrorKind::StepInstability:
        case ErrorKind::NoSteadyState:
        case ErrorKind::NoConvergence:
        case ErrorKind::GridMismatch:
        case ErrorKind::InvalidDensity: return 3;
        case ErrorKind::DegenerateMatsubara:
        case ErrorKind::DegenerateSteadyState:
        case ErrorKind::InconsistentPureDerivative:
        case ErrorKind::DegeneratePopulation:
        case ErrorKind::DivergentExponent: return 4;
    }
    return 1;
}

void apply_override(json& doc, const std::string& dotted_key, const json& value) {
    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = dotted_key.find('.', start);
        const std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw Error(ErrorKind::Config, "malformed sweep key \"" + dotted_key + "\"");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        json& child = (*node)[part];
        if (child.is_null()) child = json::object();
        if (!child.is_object()) throw Error(ErrorKind::Config, "sweep key \"" + dotted_key + "\" crosses a non-object");
        node = &child;
        start = dot + 1;
    }
}

namespace {

// ---------------------------------------------------------------------------
// Truncation and step resolution

class Context {
public:
    Context(const RunConfig& cfg, const RunOptions& opts) : cfg_(cfg), opts_(opts), resolved_(to_json(cfg)) {}

    const RunConfig& cfg() const { return cfg_; }
    const RunOptions& opts() const { return opts_; }
    json& resolved() { return resolved_; }
    json& evidence() { return evidence_; }

    void log(const std::string& line) const {
        if (opts_.log) *opts_.log << "[" << cfg_.name << "] " << line << std::endl;
    }

    std::size_t index_cap() const {
        return std::max<std::size_t>(1, opts_.max_memory / (6 * sizeof(QubitMatrix) + 64));
    }

    int threads() const { return std::max(1, opts_.threads); }

private:
    const RunConfig& cfg_;
    const RunOptions& opts_;
    json resolved_;
    json evidence_ = json::object();
};

int resolve_k(Context& ctx, const BathSpec& bath) {
    const auto& t = ctx.cfg().truncation;
    int k = 0;
    if (t.k_max) {
        k = *t.k_max;
    } else {
        RunConfig probe = ctx.cfg();
        probe.bath = bath;
        k = auto_k_max(probe);
        json rule = t.tail_correction
                        ? json{{"rule", "first omitted Matsubara rate above k_ratio * Omega"}, {"k_ratio", t.k_ratio}}
                        : json{{"rule", "Matsubara tail fraction of the zero-frequency noise"}, {"tol", t.k_tol}};
        rule["k_cap"] = t.k_cap;
        rule["selected"] = k;
        ctx.evidence()["k_max_selection"] = rule;
        ctx.log("auto k_max = " + std::to_string(k));
    }
    ctx.evidence()["matsubara_tail_fraction"] = matsubara_tail_fraction(bath, matsubara_expand(bath, k));
    ctx.resolved()["truncation"]["k_max"] = k;
    return k;
}

int max_depth_hint(const RunConfig& cfg) {
    if (cfg.truncation.depth) return *cfg.truncation.depth;
    return *std::max_element(cfg.truncation.depth_candidates.begin(), cfg.truncation.depth_candidates.end());
}

double default_heom_step(const RunConfig& cfg, const BathSpec& bath, int k, int depth) {
    const heom::Problem problem = make_heom_problem(cfg.sensor, bath, k, cfg.truncation.tail_correction);
    return heom::default_step(problem, depth);
}

struct Sampling {
    double dt{0.0};
    int stride{1};
};

// Explicit (dt, stride) or the largest step <= dt0 that lands on `samples`
// evenly spaced output times.
Sampling resolve_sampling(const TimeGrid& g, double dt0) {
    if (g.dt > 0.0) return {g.dt, g.stride};
    const double h = g.t_end / g.samples;
    const int m = std::max(1, static_cast<int>(std::ceil(h / dt0 - 1e-9)));
    return {h / m, m};
}

using Probe = std::function<std::vector<double>(int k, int depth)>;

// Walks depth candidates until two successive levels agree within depth_tol.
int resolve_depth(Context& ctx, int k, const Probe& probe) {
    const auto& t = ctx.cfg().truncation;
    if (t.depth) {
        ctx.resolved()["truncation"]["depth"] = *t.depth;
        return *t.depth;
    }
    json levels = json::array();
    std::vector<double> previous;
    int prev_depth = 0;
    for (const int depth : t.depth_candidates) {
        ctx.log("depth probe L = " + std::to_string(depth));
        json level{{"k_max", k}, {"depth", depth}, {"n_aux", heom::index_count(k + 1, depth)}};
        std::vector<double> current;
        try {
            current = probe(k, depth);
        } catch (const Error& e) {
            // A too-shallow hierarchy can yield an unphysical state; go deeper.
            if (e.kind() != ErrorKind::DegeneratePopulation && e.kind() != ErrorKind::NoSteadyState) throw;
            level["failed"] = e.what();
            levels.push_back(level);
            previous.clear();
            prev_depth = depth;
            continue;
        }
        if (!previous.empty()) {
            double dev = 0.0;
            for (std::size_t i = 0; i < current.size(); ++i) dev = std::max(dev, std::abs(current[i] - previous[i]));
            level["dev_depth"] = dev;
            levels.push_back(level);
            if (dev < t.depth_tol) {
                ctx.evidence()["depth_selection"] = {{"tol", t.depth_tol}, {"levels", levels}, {"selected", depth},
                                                     {"previous", prev_depth}};
                ctx.resolved()["truncation"]["depth"] = depth;
                ctx.log("auto depth = " + std::to_string(depth));
                return depth;
            }
        } else {
            levels.push_back(level);
        }
        previous = std::move(current);
        prev_depth = depth;
    }
    ctx.evidence()["depth_selection"] = {{"tol", t.depth_tol}, {"levels", levels}};
    throw Error(ErrorKind::NoConvergence, "hierarchy depth did not converge within the candidate list");
}

HeomSettings base_settings(const Context& ctx, int k, int depth, double dt) {
    HeomSettings s;
    s.k_max = k;
    s.depth = depth;
    s.dt = dt;
    s.tail_correction = ctx.cfg().truncation.tail_correction;
    s.threads = 1;
    s.index_cap = ctx.index_cap();
    return s;
}

BathSpec with_beta(BathSpec b, double beta) {
    b.beta = beta;
    return b;
}

BathSpec with_chi(BathSpec b, double chi) {
    b.chi = chi;
    return b;
}

json trajectory_meta(const Trajectory& t) {
    return {{"solver", t.meta.solver},
            {"k_max", t.meta.k_max},
            {"depth", t.meta.depth},
            {"dt", t.meta.dt},
            {"stride", t.meta.stride},
            {"markovian_tail", t.meta.markovian_tail},
            {"max_trace_error", t.meta.max_trace_error},
            {"max_hermiticity_error", t.meta.max_hermiticity_error},
            {"min_eigenvalue", t.meta.min_eigenvalue},
            {"positivity_violated", t.meta.positivity_violated()},
            {"step_check_deviation", t.meta.step_check_deviation}};
}

std::vector<double> bloch_samples(const Trajectory& t) {
    std::vector<double> out;
    out.reserve(3 * t.size());
    for (const auto& rho : t.states) {
        const BlochVector r = bloch_from_density(rho, 1e-6);
        out.insert(out.end(), {r.x(), r.y(), r.z()});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Time-resolved solvers shared by dynamics, qfi-dynamics and max-qfi-vs-theta

struct DynamicsSetup {
    SolverKind solver;
    HeomSettings heom;
    Sampling sampling;
};

DynamicsSetup resolve_dynamics(Context& ctx) {
    const RunConfig& cfg = ctx.cfg();
    DynamicsSetup setup;
    setup.solver = cfg.solver;
    if (cfg.solver == SolverKind::BornMarkov) {
        setup.sampling = resolve_sampling(cfg.grid, cfg.bm_dt);
    } else {
        const int k = resolve_k(ctx, cfg.bath);
        const double dt0 = default_heom_step(cfg, cfg.bath, k, max_depth_hint(cfg));
        setup.sampling = resolve_sampling(cfg.grid, dt0);
        const Sampling smp = setup.sampling;
        const int depth = resolve_depth(ctx, k, [&](int kk, int d) {
            return bloch_samples(heom_dynamics(cfg.sensor, cfg.bath, base_settings(ctx, kk, d, smp.dt), cfg.grid.t_end,
                                               smp.stride));
        });
        setup.heom = base_settings(ctx, k, depth, smp.dt);
    }
    ctx.resolved()["grid"]["dt"] = setup.sampling.dt;
    ctx.resolved()["grid"]["stride"] = setup.sampling.stride;
    return setup;
}

Trajectory run_dynamics(const DynamicsSetup& setup, const RunConfig& cfg, const SensorParams& sensor,
                        const BathSpec& bath) {
    if (setup.solver == SolverKind::BornMarkov) {
        return bm_dynamics(sensor, bath, cfg.lamb_shift, cfg.grid.t_end, setup.sampling.dt, setup.sampling.stride);
    }
    return heom_dynamics(sensor, bath, setup.heom, cfg.grid.t_end, setup.sampling.stride);
}

ExperimentResult experiment_dynamics(Context& ctx) {
    const RunConfig& cfg = ctx.cfg();
    const DynamicsSetup setup = resolve_dynamics(ctx);
    const Trajectory traj = run_dynamics(setup, cfg, cfg.sensor, cfg.bath);
    CsvTable table({"t", "rx", "ry", "rz", "sz"});
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const BlochVector r = bloch_from_density(traj.states[i], 1e-6);
        table.add_row({traj.times[i], r.x(), r.y(), r.z(), (pauli::z() * traj.states[i]).trace().real()});
    }
    ctx.evidence()["trajectory"] = trajectory_meta(traj);
    return {table, ctx.resolved(), ctx.evidence()};
}

QfiCurve qfi_curve(Context& ctx, const DynamicsSetup& setup, const SensorParams& sensor) {
    const RunConfig& cfg = ctx.cfg();
    const TrajectorySolver solver = [&](double beta) {
        return run_dynamics(setup, cfg, sensor, with_beta(cfg.bath, beta));
    };
    return qfi_dynamics(solver, cfg.bath.beta, cfg.delta_frac, ctx.threads());
}

json curve_summary(const QfiCurve& curve) {
    const TimedValue best = max_qfi_over_time(curve);
    json peaks = json::array();
    for (const std::size_t i : local_maxima(curve.values)) peaks.push_back({{"t", curve.times[i]}, {"F", curve.values[i]}});
    return {{"t_opt", best.time}, {"F_max", best.value}, {"F_initial", curve.values.front()},
            {"F_final", curve.values.back()}, {"local_maxima", peaks}, {"provenance", curve.provenance}};
}

ExperimentResult experiment_qfi_dynamics(Context& ctx) {
    const DynamicsSetup setup = resolve_dynamics(ctx);
    ctx.log("running four offset trajectories");
    const QfiCurve curve = qfi_curve(ctx, setup, ctx.cfg().sensor);
    CsvTable table({"t", "F_beta"});
    for (std::size_t i = 0; i < curve.times.size(); ++i) table.add_row({curve.times[i], curve.values[i]});
    ctx.evidence()["qfi"] = curve_summary(curve);
    return {table, ctx.resolved(), ctx.evidence()};
}

ExperimentResult experiment_max_qfi_vs_theta(Context& ctx) {
    const RunConfig& cfg = ctx.cfg();
    const DynamicsSetup setup = resolve_dynamics(ctx);
    CsvTable table({"theta", "t_opt", "F_max"});
    json points = json::array();
    for (const double theta : cfg.axis) {
        SensorParams sensor = cfg.sensor;
        sensor.theta = theta;
        ctx.log("theta = " + format_number(theta));
        const QfiCurve curve = qfi_curve(ctx, setup, sensor);
        const TimedValue best = max_qfi_over_time(curve);
        table.add_row({theta, best.time, best.value});
        json summary = curve_summary(curve);
        summary["theta"] = theta;
        points.push_back(summary);
    }
    ctx.evidence()["points"] = points;
    return {table, ctx.resolved(), ctx.evidence()};
}

// ---------------------------------------------------------------------------
// Steady states

struct SteadySetup {
    HeomSettings heom;
    heom::SteadyStateOptions ss;
};

heom::SteadyStateOptions steady_options(const RunConfig& cfg) {
    heom::SteadyStateOptions ss;
    ss.window = cfg.steady.window;
    ss.tol = cfg.steady.tol;
    ss.max_time = cfg.steady.max_time;
    ss.method = cfg.steady.method == "solve" ? heom::SteadyMethod::Solve : heom::SteadyMethod::Propagate;
    return ss;
}

double population(const RunConfig& cfg, const QubitMatrix& rho, const SensorParams& sensor) {
    return population_ratio(rho, sensor, cfg.population_basis);
}

SteadySetup resolve_steady(Context& ctx, double probe_chi) {
    const RunConfig& cfg = ctx.cfg();
    SteadySetup setup;
    setup.ss = steady_options(cfg);
    const BathSpec probe_bath = with_chi(cfg.bath, probe_chi);
    const int k = resolve_k(ctx, cfg.bath);
    double dt = cfg.grid.dt;
    if (!(dt > 0.0)) {
        // Round the default step so a window holds a whole number of steps.
        const double dt0 = default_heom_step(cfg, cfg.bath, k, max_depth_hint(cfg));
        dt = cfg.steady.window / std::ceil(cfg.steady.window / dt0 - 1e-9);
    }
    ctx.resolved()["grid"]["dt"] = dt;
    const int depth = resolve_depth(ctx, k, [&](int kk, int d) {
        const auto st = heom_steady(cfg.sensor, probe_bath, base_settings(ctx, kk, d, dt), setup.ss);
        return std::vector<double>{std::log(population(cfg, st.rho, cfg.sensor))};
    });
    setup.heom = base_settings(ctx, k, depth, dt);
    return setup;
}

struct SteadyPoint {
    double ratio{0.0};
    double qfi{0.0};
    double omega_tilde{0.0};
    json evidence;
};

SteadyPoint gibbs_point(const RunConfig& cfg) {
    SteadyPoint pt;
    const double beta = cfg.bath.beta;
    pt.ratio = population(cfg, gibbs_state(cfg.sensor, beta), cfg.sensor);
    pt.qfi = gibbs_qfi(cfg.sensor.rabi_frequency(), beta);
    pt.omega_tilde = std::log(pt.ratio) / beta;
    return pt;
}

SteadyPoint heom_point(Context& ctx, const SteadySetup& setup, double chi, bool with_qfi) {
    const RunConfig& cfg = ctx.cfg();
    if (chi == 0.0) {
        SteadyPoint pt = gibbs_point(cfg);
        pt.evidence = {{"reference", "uncoupled sensor; Gibbs state used"}};
        return pt;
    }
    const BathSpec bath = with_chi(cfg.bath, chi);
    const auto st = heom_steady(cfg.sensor, bath, setup.heom, setup.ss);
    SteadyPoint pt;
    pt.ratio = population(cfg, st.rho, cfg.sensor);
    pt.omega_tilde = std::log(pt.ratio) / cfg.bath.beta;
    pt.evidence = {{"steady_time", st.time}, {"residual", st.residual}, {"dt", st.dt},
                   {"min_eigenvalue", min_eigenvalue(st.rho)}};
    if (with_qfi) {
        // Propagated offsets share the centre's final time and step, so the
        // stencil sees no differing convergence error.
        const double t_final = st.time;
        const bool direct = setup.ss.method == heom::SteadyMethod::Solve;
        const SteadySolver solver = [&](double beta) {
            if (direct) return heom_steady(cfg.sensor, with_beta(bath, beta), setup.heom, setup.ss).rho;
            return heom_state_at(cfg.sensor, with_beta(bath, beta), setup.heom, t_final);
        };
        pt.qfi = steady_qfi(solver, cfg.bath.beta, cfg.delta_frac, ctx.threads()).qfi;
    }
    return pt;
}

SteadyPoint bm_point(const RunConfig& cfg, double chi) {
    if (chi == 0.0) {
        SteadyPoint pt = gibbs_point(cfg);
        pt.evidence = {{"reference", "uncoupled sensor; Gibbs state used"}};
        return pt;
    }
    const BathSpec bath = with_chi(cfg.bath, chi);
    const QubitMatrix rho = bm_steady(cfg.sensor, bath, cfg.lamb_shift);
    SteadyPoint pt;
    pt.ratio = population(cfg, rho, cfg.sensor);
    pt.omega_tilde = std::log(pt.ratio) / cfg.bath.beta;
    const SteadySolver solver = [&](double beta) { return bm_steady(cfg.sensor, with_beta(bath, beta), cfg.lamb_shift); };
    pt.qfi = steady_qfi(solver, cfg.bath.beta, cfg.delta_frac, 1).qfi;
    pt.evidence = {{"min_eigenvalue", min_eigenvalue(rho)}, {"matsubara_terms", kBmMatsubaraTerms}};
    return pt;
}

void convergence_evidence(Context& ctx, const SteadySetup& setup, double chi) {
    const RunConfig& cfg = ctx.cfg();
    if (!cfg.converge) return;
    const ConvergeSpec& spec = *cfg.converge;
    const BathSpec bath = with_chi(cfg.bath, spec.at_chi.value_or(chi));
    ctx.log("convergence evidence at chi = " + format_number(bath.chi));
    const heom::ConvergenceReport report = heom::convergence_sweep(
        [&](int k, int depth) {
            HeomSettings s = setup.heom;
            s.k_max = k;
            s.depth = depth;
            const auto st = heom_steady(cfg.sensor, bath, s, setup.ss);
            return std::vector<double>{std::log(population(cfg, st.rho, cfg.sensor))};
        },
        spec.k_values, spec.depth_values, spec.tol);
    json levels = json::array();
    for (const auto& l : report.levels) {
        levels.push_back({{"k_max", l.k_max}, {"depth", l.depth}, {"n_aux", l.n_aux}, {"dev_depth", l.dev_depth},
                          {"dev_k", l.dev_k}});
    }
    ctx.evidence()["convergence"] = {{"probe", "log steady population ratio"}, {"chi", bath.chi}, {"tol", report.tol},
                                     {"converged", report.converged}, {"k_max", report.k_max},
                                     {"depth", report.depth}, {"levels", levels}};
}

ExperimentResult experiment_steady_vs_chi(Context& ctx) {
    const RunConfig& cfg = ctx.cfg();
    const bool uses_heom = std::find(cfg.solvers.begin(), cfg.solvers.end(), SolverKind::Heom) != cfg.solvers.end();
    const double max_chi = *std::max_element(cfg.axis.begin(), cfg.axis.end());
    SteadySetup setup;
    if (uses_heom) {
        setup = resolve_steady(ctx, max_chi);
        convergence_evidence(ctx, setup, max_chi);
    }
    std::vector<std::string> columns{"chi"};
    for (const auto s : cfg.solvers) {
        const std::string tag = to_string(s);
        columns.insert(columns.end(), {"ratio_" + tag, "F_steady_" + tag, "omega_tilde_H_" + tag});
    }
    CsvTable table(columns);
    json points = json::array();
    for (const double chi : cfg.axis) {
        ctx.log("chi = " + format_number(chi));
        std::vector<double> row{chi};
        json pt_ev{{"chi", chi}};
        for (const auto s : cfg.solvers) {
            SteadyPoint pt;
            switch (s) {
                case SolverKind::Heom: pt = heom_point(ctx, setup, chi, true); break;
                case SolverKind::BornMarkov: pt = bm_point(cfg, chi); break;
                case SolverKind::Gibbs: pt = gibbs_point(cfg); break;
            }
            row.insert(row.end(), {pt.ratio, pt.qfi, pt.omega_tilde});
            pt_ev[to_string(s)] = pt.evidence;
        }
        table.add_row(row);
        points.push_back(pt_ev);
    }
    ctx.evidence()["points"] = points;
    ctx.evidence()["gibbs"] = {{"omega", cfg.sensor.rabi_frequency()},
                               {"omega_star", omega_star(cfg.bath.beta)},
                               {"F_gibbs", gibbs_qfi(cfg.sensor.rabi_frequency(), cfg.bath.beta)}};
    ctx.evidence()["population_basis"] = to_string(cfg.population_basis);
    return {table, ctx.resolved(), ctx.evidence()};
}

ExperimentResult experiment_table1(Context& ctx) {
    const RunConfig& cfg = ctx.cfg();
    const double omega = cfg.sensor.rabi_frequency();
    const double max_chi = *std::max_element(cfg.axis.begin(), cfg.axis.end());
    const SteadySetup setup = resolve_steady(ctx, max_chi);
    convergence_evidence(ctx, setup, max_chi);
    CsvTable table({"chi", "omega_P_ratio", "omega_H_ratio"});
    json points = json::array();
    for (const double chi : cfg.axis) {
        ctx.log("chi = " + format_number(chi));
        const polaron::PolaronSolution pol = polaron::solve_selfconsistent(cfg.sensor, with_chi(cfg.bath, chi));
        SteadyPoint h;
        if (chi == 0.0) {
            // Without coupling there is nothing to renormalise.
            h.omega_tilde = omega;
            h.evidence = {{"reference", "uncoupled sensor; omega_tilde = Omega"}};
        } else {
            h = heom_point(ctx, setup, chi, false);
        }
        table.add_row({chi, pol.omega_p / omega, h.omega_tilde / omega});
        json alternatives = json::array();
        for (const auto& a : pol.alternatives) alternatives.push_back({{"eta", a.eta}, {"omega_p_ratio", a.omega_p / omega}});
        points.push_back({{"chi", chi},
                          {"polaron", {{"eta", pol.eta}, {"iterations", pol.iterations}, {"residual", pol.residual},
                                       {"energy_shift", pol.energy_shift}, {"alternatives", alternatives}}},
                          {"heom", h.evidence}});
    }
    ctx.evidence()["points"] = points;
    ctx.evidence()["population_basis"] = to_string(cfg.population_basis);
    return {table, ctx.resolved(), ctx.evidence()};
}

// ---------------------------------------------------------------------------

ExperimentResult experiment_compare_bm(Context& ctx) {
    const RunConfig& cfg = ctx.cfg();
    RunConfig heom_cfg = cfg;
    heom_cfg.solver = SolverKind::Heom;
    Context inner(heom_cfg, ctx.opts());
    const DynamicsSetup setup = resolve_dynamics(inner);
    ctx.resolved()["truncation"] = inner.resolved()["truncation"];
    ctx.resolved()["grid"] = inner.resolved()["grid"];
    ctx.evidence() = inner.evidence();

    const Trajectory h = heom_dynamics(cfg.sensor, cfg.bath, setup.heom, cfg.grid.t_end, setup.sampling.stride);
    // Born-Markov on the same output times with a step no larger than bm_dt.
    const double spacing = setup.sampling.dt * setup.sampling.stride;
    const int sub = std::max(1, static_cast<int>(std::ceil(spacing / cfg.bm_dt - 1e-9)));
    const Trajectory b = bm_dynamics(cfg.sensor, cfg.bath, cfg.lamb_shift, cfg.grid.t_end, spacing / sub, sub);
    if (b.size() != h.size()) throw Error(ErrorKind::GridMismatch, "HEOM and Born-Markov sample counts differ");

    CsvTable table({"t", "sz_heom", "sz_bm"});
    const auto sz_h = sigma_z_expectation(h);
    const auto sz_b = sigma_z_expectation(b);
    double deviation = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        table.add_row({h.times[i], sz_h[i], sz_b[i]});
        deviation = std::max(deviation, std::abs(sz_h[i] - sz_b[i]));
    }
    ctx.evidence()["max_abs_deviation"] = deviation;
    ctx.evidence()["heom"] = trajectory_meta(h);
    ctx.evidence()["bornmarkov"] = trajectory_meta(b);
    return {table, ctx.resolved(), ctx.evidence()};
}

ExperimentResult experiment_converge(Context& ctx) {
    const RunConfig& cfg = ctx.cfg();
    const ConvergeSpec& spec = *cfg.converge;
    const int k_hi = *std::max_element(spec.k_values.begin(), spec.k_values.end());
    const int l_hi = *std::max_element(spec.depth_values.begin(), spec.depth_values.end());
    const double dt0 = default_heom_step(cfg, cfg.bath, k_hi, l_hi);
    heom::LevelProbe probe;
    if (spec.probe == "steady") {
        double dt = cfg.grid.dt > 0.0 ? cfg.grid.dt : cfg.steady.window / std::ceil(cfg.steady.window / dt0 - 1e-9);
        ctx.resolved()["grid"]["dt"] = dt;
        const auto ss = steady_options(cfg);
        probe = [&ctx, &cfg, dt, ss](int k, int d) {
            ctx.log("level k_max = " + std::to_string(k) + ", depth = " + std::to_string(d));
            const auto st = heom_steady(cfg.sensor, cfg.bath, base_settings(ctx, k, d, dt), ss);
            return std::vector<double>{std::log(population(cfg, st.rho, cfg.sensor))};
        };
    } else {
        const Sampling smp = resolve_sampling(cfg.grid, dt0);
        ctx.resolved()["grid"]["dt"] = smp.dt;
        ctx.resolved()["grid"]["stride"] = smp.stride;
        probe = [&ctx, &cfg, smp](int k, int d) {
            ctx.log("level k_max = " + std::to_string(k) + ", depth = " + std::to_string(d));
            return sigma_z_expectation(
                heom_dynamics(cfg.sensor, cfg.bath, base_settings(ctx, k, d, smp.dt), cfg.grid.t_end, smp.stride));
        };
    }
    const heom::ConvergenceReport report = heom::convergence_sweep(probe, spec.k_values, spec.depth_values, spec.tol);
    CsvTable table({"k_max", "depth", "n_aux", "dev_depth", "dev_k"});
    for (const auto& l : report.levels) {
        table.add_row({static_cast<double>(l.k_max), static_cast<double>(l.depth), static_cast<double>(l.n_aux),
                       l.dev_depth, l.dev_k});
    }
    ctx.evidence()["convergence"] = {{"probe", spec.probe}, {"tol", report.tol}, {"converged", report.converged},
                                     {"k_max", report.k_max}, {"depth", report.depth}};
    return {table, ctx.resolved(), ctx.evidence()};
}

bool is_manifest(const json& doc) {
    return doc.is_object() && doc.value("format", "") == "qthermo-manifest" && doc.contains("config");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Config, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::Config, "short write to " + path.string());
}

}  // namespace

ExperimentResult execute(const RunConfig& cfg, const RunOptions& opts) {
    Context ctx(cfg, opts);
    for (const auto& w : bath_warnings(cfg.bath)) ctx.evidence()["warnings"].push_back(w);
    switch (cfg.experiment) {
        case Experiment::Dynamics: return experiment_dynamics(ctx);
        case Experiment::QfiDynamics: return experiment_qfi_dynamics(ctx);
        case Experiment::MaxQfiVsTheta: return experiment_max_qfi_vs_theta(ctx);
        case Experiment::SteadyVsChi: return experiment_steady_vs_chi(ctx);
        case Experiment::Table1: return experiment_table1(ctx);
        case Experiment::CompareBm: return experiment_compare_bm(ctx);
        case Experiment::Converge: return experiment_converge(ctx);
    }
    throw Error(ErrorKind::Config, "unknown experiment");
}

RunResult run(const json& input, const RunOptions& opts) {
    const bool replay = is_manifest(input);
    json doc = replay ? input.at("config") : input;
    if (doc.contains("sweep")) doc.erase("sweep");

    std::vector<Diagnostic> diags = validate_config(doc, opts.max_memory);
    for (const auto& d : diags) {
        if (d.severity == "error") throw Error(ErrorKind::Config, (d.path.empty() ? "" : d.path + ": ") + d.message);
    }
    const RunConfig cfg = parse_config(doc);

    const auto start = std::chrono::steady_clock::now();
    ExperimentResult result = execute(cfg, opts);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::filesystem::create_directories(opts.output_dir);
    const std::string csv_name = cfg.name + ".csv";
    const std::string csv = result.table.str();
    const std::filesystem::path csv_path = opts.output_dir / csv_name;
    write_text(csv_path, csv);

    json warnings = json::array();
    for (const auto& d : diags) {
        if (d.severity == "warning") warnings.push_back(to_json(d));
    }
    json manifest;
    manifest["format"] = "qthermo-manifest";
    manifest["software"] = {{"name", "qthermo"}, {"version", software_version()}};
    manifest["config"] = result.resolved;
    manifest["source"] = replay ? input.value("source", json()) : input;
    manifest["evidence"] = result.evidence;
    manifest["diagnostics"] = warnings;
    manifest["run"] = {{"threads", opts.threads}, {"seed", opts.seed}, {"wall_time_s", wall}, {"replay", replay}};
    manifest["outputs"] = json::array({{{"file", csv_name}, {"bytes", csv.size()}, {"fnv1a64", fnv1a64_hex(csv)},
                                        {"columns", result.table.columns()}, {"rows", result.table.rows()}}});
    const std::filesystem::path manifest_path = opts.output_dir / (cfg.name + ".manifest.json");
    write_text(manifest_path, manifest.dump(2) + "\n");
    return {{csv_path, manifest_path}, manifest};
}

RunResult sweep(const json& doc, const RunOptions& opts) {
    if (!doc.is_object() || !doc.contains("sweep") || !doc.at("sweep").is_object() || doc.at("sweep").empty()) {
        throw Error(ErrorKind::Config, "sweep needs a non-empty \"sweep\" object of dotted keys to arrays");
    }
    std::vector<Diagnostic> diags;
    const RunConfig base = read_config(doc, diags);
    for (const auto& d : diags) {
        if (d.severity == "error") throw Error(ErrorKind::Config, d.path + ": " + d.message);
    }
    std::vector<std::pair<std::string, json>> axes;
    for (const auto& [key, values] : doc.at("sweep").items()) axes.emplace_back(key, values);

    // Cartesian product, last axis fastest.
    std::vector<std::size_t> idx(axes.size(), 0);
    RunResult out;
    json points = json::array();
    for (;;) {
        json point = doc;
        point.erase("sweep");
        std::string suffix;
        json assignment = json::object();
        for (std::size_t a = 0; a < axes.size(); ++a) {
            const json& value = axes[a].second.at(idx[a]);
            apply_override(point, axes[a].first, value);
            const std::string leaf = axes[a].first.substr(axes[a].first.rfind('.') + 1);
            suffix += "_" + leaf + "-" + (value.is_string() ? value.get<std::string>() : value.dump());
            assignment[axes[a].first] = value;
        }
        for (char& c : suffix) {
            if (c == '/' || c == '*' || c == ' ') c = '_';
        }
        point["name"] = base.name + suffix;
        RunResult r = run(point, opts);
        out.files.insert(out.files.end(), r.files.begin(), r.files.end());
        points.push_back({{"assignment", assignment}, {"manifest", r.files.back().filename().string()},
                          {"csv", r.files.front().filename().string()}});

        std::size_t a = axes.size();
        while (a > 0) {
            --a;
            if (++idx[a] < axes[a].second.size()) break;
            idx[a] = 0;
            if (a == 0) {
                a = axes.size() + 1;
                break;
            }
        }
        if (a == axes.size() + 1 || axes.empty()) break;
    }
    out.manifest = {{"format", "qthermo-sweep"}, {"software", {{"name", "qthermo"}, {"version", software_version()}}},
                    {"source", doc}, {"points", points}};
    const std::filesystem::path path = opts.output_dir / (base.name + ".sweep.json");
    write_text(path, out.manifest.dump(2) + "\n");
    out.files.push_back(path);
    return out;
}

}  // namespace qthermo::cli
