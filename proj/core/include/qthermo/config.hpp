#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qthermo/bath.hpp"
#include "qthermo/estimation.hpp"
#include "qthermo/model.hpp"

namespace qthermo::cli {

enum class Experiment { Dynamics, QfiDynamics, MaxQfiVsTheta, SteadyVsChi, Table1, CompareBm, Converge };
enum class SolverKind { Heom, BornMarkov, Gibbs };

const char* to_string(Experiment e) noexcept;
const char* to_string(SolverKind s) noexcept;

struct Truncation {
    std::optional<int> k_max;  // empty means "auto"
    std::optional<int> depth;  // empty means "auto"
    double k_tol{0.02};        // Matsubara tail fraction accepted by auto k_max
    double k_ratio{5.0};       // with tail_correction: first omitted rate over Omega
    int k_cap{16};
    std::vector<int> depth_candidates{2, 3, 4, 5, 6, 7, 8};
    double depth_tol{1e-3};
    bool tail_correction{false};
};

struct TimeGrid {
    double t_end{50.0};
    double dt{0.0};     // 0 selects the solver default
    int stride{1};      // steps per output sample when dt is given
    int samples{500};   // output samples over [0, t_end] when dt is automatic
};

struct SteadySpec {
    double window{20.0};
    double tol{1e-9};
    double max_time{4000.0};
    std::string method{"propagate"};  // or "solve": sparse LU on the hierarchy generator
};

/// Grid of truncations evaluated for convergence evidence.
struct ConvergeSpec {
    std::vector<int> k_values;
    std::vector<int> depth_values;
    double tol{1e-3};
    std::string probe{"dynamics"};  // "dynamics" (<sigma_z(t)>) or "steady" (population ratio)
    std::optional<double> at_chi;   // table1 / steady-vs-chi: coupling the evidence is gathered at
};

struct RunConfig {
    Experiment experiment{Experiment::Dynamics};
    std::string name;
    SensorParams sensor;
    BathSpec bath;
    SolverKind solver{SolverKind::Heom};
    std::vector<SolverKind> solvers;  // steady-vs-chi
    Truncation truncation;
    TimeGrid grid;
    std::vector<double> axis;  // theta values (max-qfi-vs-theta) or chi values (steady-vs-chi, table1)
    SteadySpec steady;
    PopulationBasis population_basis{PopulationBasis::Eigen};
    double delta_frac{kDefaultDeltaFrac};
    bool lamb_shift{false};
    double bm_dt{0.01};
    std::optional<ConvergeSpec> converge;
    nlohmann::json sweep;  // {"bath.omega_c": [...]} for the sweep subcommand
};

struct Diagnostic {
    std::string severity;  // "error" or "warning"
    std::string path;      // dotted key
    std::string message;
};

nlohmann::json to_json(const Diagnostic& d);

/// Evaluates a numeric literal or an arithmetic expression in numbers and "pi"
/// (e.g. "2*pi/3"). Throws Error(Config) on malformed input.
double parse_expression(const std::string& text);

/// Parses and checks a config document. Problems are appended to diags; the
/// returned config is meaningful only when no error was recorded.
RunConfig read_config(const nlohmann::json& doc, std::vector<Diagnostic>& diags);

/// Semantic checks beyond parsing: parameter ranges, Matsubara resonances and
/// the hierarchy memory estimate against max_memory bytes.
std::vector<Diagnostic> validate_config(const nlohmann::json& doc, std::size_t max_memory);

/// k_max chosen for "auto". Without tail_correction: the shortest series whose
/// Matsubara tail fraction is below k_tol. With it: the omitted poles act as
/// white noise, so keep every pole slower than k_ratio * Omega. Both capped at k_cap.
int auto_k_max(const RunConfig& cfg);

/// read_config, throwing Error(Config) with the first error when any occurs.
RunConfig parse_config(const nlohmann::json& doc);

nlohmann::json to_json(const RunConfig& cfg);

/// Bytes needed to propagate a hierarchy of n_terms exponentials at depth.
std::size_t hierarchy_memory_estimate(int n_terms, int depth);

/// Parses "512M", "4G", "1048576" and similar into bytes.
std::size_t parse_memory(const std::string& text);

nlohmann::json load_json_file(const std::string& path);

}  // namespace qthermo::cli
