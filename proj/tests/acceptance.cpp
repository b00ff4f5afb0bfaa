// Acceptance gate: one PASS/FAIL line per criterion.
//
//   qthermo_acceptance [--fast] [--criterion N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qthermo/bath.hpp"
#include "qthermo/config.hpp"
#include "qthermo/errors.hpp"
#include "qthermo/estimation.hpp"
#include "qthermo/heom.hpp"
#include "qthermo/model.hpp"
#include "qthermo/polaron.hpp"
#include "qthermo/runner.hpp"
#include "qthermo/workflows.hpp"

using namespace qthermo;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass{false};
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    double budget_s;  // runtime limit; 0 means none
    std::function<Outcome(bool fast)> run;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

std::string join(const std::vector<double>& v, int digits = 4) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i], digits);
    return s + "]";
}

json load_config(const std::string& name) {
    return cli::load_json_file(std::string(QTHERMO_SOURCE_DIR) + "/configs/" + name);
}

cli::ExperimentResult execute(json doc) {
    doc.erase("sweep");
    cli::RunOptions opts;
    return cli::execute(cli::parse_config(doc), opts);
}

std::vector<double> column(const cli::CsvTable& t, const std::string& name) {
    const auto& cols = t.columns();
    const auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw std::runtime_error("missing column " + name);
    const auto c = static_cast<std::size_t>(it - cols.begin());
    std::vector<double> out(t.rows());
    for (std::size_t r = 0; r < t.rows(); ++r) out[r] = t.at(r, c);
    return out;
}

// Criterion 1. Re C(0) diverges logarithmically for the Drude form, so the
// reference scale is the largest |C| on the sampled grid (t > 0).
Outcome bath_oracle(bool) {
    struct Case {
        double beta, omega_c, chi;
    };
    const Case cases[] = {{0.06, 10, 0.06}, {0.95, 0.8, 0.5}, {5, 0.5, 0.3}};
    Outcome out{true, ""};
    for (const auto& c : cases) {
        const auto t0 = std::chrono::steady_clock::now();
        const BathSpec b{c.chi, c.omega_c, c.beta};
        const ExponentialSeries s = matsubara_expand(b, 5000);
        double scale = 0.0;
        double worst = 0.0;
        for (int j = 1; j <= 200; ++j) {
            const double t = 0.05 * j;
            const Complex ref = correlation_quadrature(b, t);
            scale = std::max(scale, std::abs(ref));
            worst = std::max(worst, std::abs(correlation_from_series(s, t) - ref));
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double rel = worst / scale;
        out.pass = out.pass && rel <= 1e-4 && secs < 1.0;
        out.detail += "(beta=" + fmt(c.beta) + ") rel " + fmt(rel, 3) + " in " + fmt(secs, 3) + "s; ";
    }
    return out;
}

// Criterion 2.
Outcome pure_dephasing(bool) {
    SensorParams p;
    p.epsilon = 0.5;
    p.theta = kPi / 2;
    const BathSpec b{0.05, 1.0, 1.0};
    const int k = 4;
    const int depth = 6;
    heom::Problem problem = make_heom_problem(p, b, k, true);
    problem.hamiltonian = 0.5 * p.epsilon * pauli::z();
    heom::HierarchyState state = heom::build_hierarchy(problem.series, depth, build_initial_state(p));
    heom::PropagationOptions opts;
    opts.dt = 0.005;
    opts.stride = 20;
    const Trajectory t = heom::propagate(state, problem, 10.0, opts);
    double coh = 0.0;
    double pop = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double exact = std::exp(-dephasing_exponent(b, t.times[i]));
        coh = std::max(coh, std::abs(2.0 * std::abs(t.states[i](0, 1)) - exact));
        pop = std::max(pop, std::abs(t.states[i](0, 0).real() - t.states[0](0, 0).real()));
    }
    return {coh <= 1e-3 && pop <= 1e-8, "coherence dev " + fmt(coh, 3) + ", population drift " + fmt(pop, 3) +
                                             " (K=" + std::to_string(k) + ", L=" + std::to_string(depth) + ")"};
}

double compare_bm_deviation(double omega_c, int& depth) {
    json doc = load_config("fig6_compare_bm.json");
    doc["bath"]["omega_c"] = omega_c;
    const auto r = execute(doc);
    const auto h = column(r.table, "sz_heom");
    const auto m = column(r.table, "sz_bm");
    double dev = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) dev = std::max(dev, std::abs(h[i] - m[i]));
    depth = r.resolved["truncation"]["depth"].get<int>();
    return dev;
}

// Criterion 3.
Outcome fast_reservoir(bool) {
    int l_fast = 0;
    int l_slow = 0;
    const double fast = compare_bm_deviation(30.0, l_fast);
    const double slow = compare_bm_deviation(0.05, l_slow);
    return {fast < 0.05 && slow > 0.05, "omega_c=30: " + fmt(fast, 3) + " (L=" + std::to_string(l_fast) +
                                            "), omega_c=0.05: " + fmt(slow, 3) + " (L=" + std::to_string(l_slow) + ")"};
}

// Criterion 4.
Outcome qfi_structure(bool) {
    struct Curve {
        std::vector<double> t, f;
        int depth;
    };
    const auto curve = [](double omega_c) {
        json doc = load_config("fig2_qfi_dynamics.json");
        doc["bath"]["omega_c"] = omega_c;
        const auto r = execute(doc);
        return Curve{column(r.table, "t"), column(r.table, "F_beta"), r.resolved["truncation"]["depth"].get<int>()};
    };
    const Curve fast = curve(10.0);
    const Curve slow = curve(0.5);
    const auto peaks_fast = local_maxima(fast.f);
    const auto peaks_slow = local_maxima(slow.f);
    // Plateau: the last fifth of the window stays within 1% of its final value.
    const std::size_t tail0 = fast.f.size() * 4 / 5;
    double spread = 0.0;
    for (std::size_t i = tail0; i < fast.f.size(); ++i) spread = std::max(spread, std::abs(fast.f[i] - fast.f.back()));
    const bool plateau = spread <= 1e-2 * std::abs(fast.f.back());
    const double max_fast = *std::max_element(fast.f.begin(), fast.f.end());
    const double max_slow = *std::max_element(slow.f.begin(), slow.f.end());
    std::vector<double> t_fast, t_slow;
    for (auto i : peaks_fast) t_fast.push_back(fast.t[i]);
    for (auto i : peaks_slow) t_slow.push_back(slow.t[i]);
    const bool ok = std::abs(fast.f.front()) < 1e-6 && std::abs(slow.f.front()) < 1e-6 && peaks_fast.size() == 1 &&
                    plateau && peaks_slow.size() >= 2 && max_slow > max_fast;
    return {ok, "F(0)=" + fmt(fast.f.front(), 2) + "/" + fmt(slow.f.front(), 2) + "; omega_c=10 (L=" +
                    std::to_string(fast.depth) + ") maxima at t=" + join(t_fast) + ", plateau spread " +
                    fmt(spread / std::abs(fast.f.back()), 2) + "; omega_c=0.5 (L=" + std::to_string(slow.depth) +
                    ") maxima at t=" + join(t_slow) + "; max F " + fmt(max_slow) + " vs " + fmt(max_fast)};
}

// Criterion 5. Reference: Omega^2 / (2 + 2 cosh(beta Omega)). The grid keeps
// beta Omega <= 12: beyond that rho_ee sinks under the roundoff of the O(1)
// matrix entries and no ratio read back from a density matrix holds 1e-10.
Outcome gibbs_forms(bool) {
    double qfi_dev = 0.0;
    double ratio_dev = 0.0;
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double omega = 0.2 + 0.5 * i;
            const double beta = 0.05 + 0.275 * j;
            const double a = 0.1 + 0.15 * (i + j);
            SensorParams p;
            p.epsilon = omega * std::cos(a);
            p.delta = omega * std::sin(a);
            const double ref = omega * omega / (2.0 + 2.0 * std::cosh(beta * omega));
            const double f = qfi_bloch(gibbs_bloch(p, beta), gibbs_bloch_derivative(p, beta));
            qfi_dev = std::max(qfi_dev, std::abs(f - ref));
            const double ratio = population_ratio(gibbs_state(p, beta), p);
            ratio_dev = std::max(ratio_dev, std::abs(ratio / std::exp(beta * omega) - 1.0));
        }
    }
    return {qfi_dev <= 1e-8 && ratio_dev <= 1e-10,
            "max |F - closed form| " + fmt(qfi_dev, 3) + ", max relative ratio error " + fmt(ratio_dev, 3)};
}

// Criterion 6.
Outcome omega_star_check(bool) {
    const double w = omega_star(0.1);
    const double x = omega_star_x();
    const double residual = x * std::sinh(x) - 2.0 * (1.0 + std::cosh(x));
    return {w >= 23.9 && w <= 24.1 && std::abs(residual) < 1e-9,
            "omega_star(0.1) = " + fmt(w, 8) + ", root residual " + fmt(residual, 2)};
}

const std::vector<double> kTableChi{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};

// Criterion 7.
Outcome polaron_row(bool) {
    const std::vector<double> expected{1.000, 0.968, 0.932, 0.890, 0.837, 0.741};
    const cli::RunConfig cfg = cli::parse_config(load_config("table1.json"));
    const double omega = cfg.sensor.rabi_frequency();
    std::vector<double> got;
    bool ok = true;
    for (std::size_t i = 0; i < kTableChi.size(); ++i) {
        BathSpec b = cfg.bath;
        b.chi = kTableChi[i];
        const auto sol = polaron::solve_selfconsistent(cfg.sensor, b);
        got.push_back(sol.omega_p / omega);
        ok = ok && std::abs(got.back() - expected[i]) <= 0.005;
    }
    return {ok, "omega_P/Omega = " + join(got, 4) + " expected " + join(expected, 3)};
}

// Criterion 8.
Outcome heom_row(bool fast) {
    const std::vector<double> expected{1.000, 0.834, 0.818, 0.794, 0.766, 0.734};
    json doc = load_config("table1.json");
    const double tol = fast ? 0.05 : 0.03;
    if (fast) {
        doc["truncation"]["k_max"] = 1;
        doc["converge"] = {{"k_values", {1, 2}}, {"depth_values", {4, 6}}, {"probe", "steady"}, {"tol", 1e-3}};
    }
    const auto r = execute(doc);
    const auto got = column(r.table, "omega_H_ratio");
    bool ok = got.size() == expected.size();
    for (std::size_t i = 0; ok && i < got.size(); ++i) ok = std::abs(got[i] - expected[i]) <= tol;
    const json& cv = r.evidence["convergence"];
    const bool evidence = cv.contains("levels") && !cv["levels"].empty();
    std::string plateau = "levels " + std::to_string(cv.value("levels", json::array()).size());
    if (evidence) {
        const json& last = cv["levels"].back();
        plateau += ", final dev_depth " + fmt(last.value("dev_depth", -1.0), 2) + " dev_k " +
                   fmt(last.value("dev_k", -1.0), 2);
    }
    return {ok && evidence, std::string(fast ? "fast " : "") + "omega_H/Omega = " + join(got, 4) + " expected " +
                                join(expected, 3) + " +/- " + fmt(tol, 2) + "; K=" +
                                std::to_string(r.resolved["truncation"]["k_max"].get<int>()) + " L=" +
                                std::to_string(r.resolved["truncation"]["depth"].get<int>()) + "; " + plateau};
}

// Criterion 9.
Outcome noncanonical(bool) {
    const auto f4 = execute(load_config("fig4_steady_vs_chi.json"));
    const auto chi = column(f4.table, "chi");
    const auto ratio = column(f4.table, "ratio_heom");
    const auto ratio_bm = column(f4.table, "ratio_bornmarkov");
    const auto f_heom = column(f4.table, "F_steady_heom");
    const auto f_gibbs = column(f4.table, "F_steady_gibbs");
    const cli::RunConfig cfg4 = cli::parse_config(load_config("fig4_steady_vs_chi.json"));
    const double canonical = std::exp(cfg4.bath.beta * cfg4.sensor.rabi_frequency());
    bool decreasing = true;
    bool below = true;
    double bm_spread = 0.0;
    for (std::size_t i = 0; i < chi.size(); ++i) {
        if (i > 0) decreasing = decreasing && ratio[i] < ratio[i - 1];
        if (chi[i] > 0) below = below && ratio[i] < canonical;
        bm_spread = std::max(bm_spread, std::abs(ratio_bm[i] / ratio_bm.front() - 1.0));
    }
    const bool bm_flat = bm_spread < 1e-8;
    const bool f4_qfi = f_heom.back() > f_gibbs.back();

    const auto f5 = execute(load_config("fig5_steady_vs_chi.json"));
    const auto f5_heom = column(f5.table, "F_steady_heom");
    const auto f5_gibbs = column(f5.table, "F_steady_gibbs");
    const bool f5_qfi = f5_heom.back() < f5_gibbs.back();

    return {decreasing && below && bm_flat && f4_qfi && f5_qfi,
            "Fig4 ratio " + join(ratio) + " vs e^(beta Omega) " + fmt(canonical) + ", BM spread " + fmt(bm_spread, 2) +
                ", F_H " + fmt(f_heom.back()) + " vs F_G " + fmt(f_gibbs.back()) + "; Fig5 F_H " +
                fmt(f5_heom.back()) + " vs F_G " + fmt(f5_gibbs.back())};
}

// Criterion 10: the property tests live in the unit suite.
Outcome invariants(bool) {
#ifdef QTHERMO_TESTS
    const std::string filter =
        "HeomProperty.*:PolaronProperty.*:FiniteDiff.*:QfiDynamics.*:"
        "Runner.ThreadCountDoesNotChangeOutput";
    const std::string cmd = std::string("\"") + QTHERMO_TESTS + "\" --gtest_brief=1 --gtest_filter='" + filter + "'";
    const auto t0 = std::chrono::steady_clock::now();
    const int rc = std::system(cmd.c_str());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {rc == 0 && secs < 600.0, "property tests exit " + std::to_string(rc) + " in " + fmt(secs, 3) + "s"};
#else
    return {false, "unit-test binary not available"};
#endif
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qthermo acceptance suite"};
    bool fast = false;
    std::vector<int> only;
    app.add_flag("--fast", fast, "reduced-tolerance variants where defined");
    app.add_option("--criterion", only, "run only these criteria");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{
        {1, "bath expansion oracle", 0, bath_oracle},
        {2, "pure-dephasing oracle", 30, pure_dephasing},
        {3, "fast-reservoir agreement", 0, fast_reservoir},
        {4, "QFI structure", 0, qfi_structure},
        {5, "Gibbs closed forms", 1, gibbs_forms},
        {6, "Omega* threshold", 0.1, omega_star_check},
        {7, "polaron renormalisation", 10, polaron_row},
        {8, "HEOM renormalisation", 0, heom_row},
        {9, "noncanonical steady state", 0, noncanonical},
        {10, "structural invariants", 600, invariants},
    };

    int failures = 0;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run(fast);
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        double budget = c.budget_s;
        if (c.id == 8 && fast) budget = 300;
        if (budget > 0 && secs >= budget) {
            o.pass = false;
            o.detail += "; over the " + fmt(budget) + "s budget";
        }
        std::cout << "CRITERION " << c.id << " " << (o.pass ? "PASS" : "FAIL") << " " << c.title << ": " << o.detail
                  << " [" << fmt(secs, 3) << "s]" << std::endl;
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
