#include "qthermo/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "qthermo/errors.hpp"
#include "qthermo/heom.hpp"

namespace qthermo::cli {

using nlohmann::json;

namespace {

const std::map<std::string, Experiment> kExperiments{
    {"dynamics", Experiment::Dynamics},          {"qfi-dynamics", Experiment::QfiDynamics},
    {"max-qfi-vs-theta", Experiment::MaxQfiVsTheta}, {"steady-vs-chi", Experiment::SteadyVsChi},
    {"table1", Experiment::Table1},              {"compare-bm", Experiment::CompareBm},
    {"converge", Experiment::Converge},
};

const std::map<std::string, SolverKind> kSolvers{
    {"heom", SolverKind::Heom}, {"bornmarkov", SolverKind::BornMarkov}, {"gibbs", SolverKind::Gibbs}};

}  // namespace

const char* to_string(Experiment e) noexcept {
    for (const auto& [name, value] : kExperiments) {
        if (value == e) return name.c_str();
    }
    return "unknown";
}

const char* to_string(SolverKind s) noexcept {
    for (const auto& [name, value] : kSolvers) {
        if (value == s) return name.c_str();
    }
    return "unknown";
}

json to_json(const Diagnostic& d) { return {{"severity", d.severity}, {"path", d.path}, {"message", d.message}}; }

// ---------------------------------------------------------------------------
// Arithmetic expressions: expr := term (('+'|'-') term)*, term := unary
// (('*'|'/') unary)*, unary := '-' unary | atom, atom := number | pi | (expr).

namespace {

class ExprParser {
public:
    explicit ExprParser(const std::string& s) : s_(s) {}

    double parse() {
        const double v = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return v;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw Error(ErrorKind::Config, "cannot evaluate \"" + s_ + "\": " + why);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    double expr() {
        double v = term();
        for (;;) {
            if (eat('+')) v += term();
            else if (eat('-')) v -= term();
            else return v;
        }
    }

    double term() {
        double v = unary();
        for (;;) {
            if (eat('*')) v *= unary();
            else if (eat('/')) v /= unary();
            else return v;
        }
    }

    double unary() {
        if (eat('-')) return -unary();
        if (eat('+')) return unary();
        return atom();
    }

    double atom() {
        skip();
        if (eat('(')) {
            const double v = expr();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        if (s_.compare(pos_, 2, "pi") == 0) {
            pos_ += 2;
            return kPi;
        }
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail(pos_ < s_.size() ? "expected a number" : "unexpected end");
        pos_ += static_cast<std::size_t>(end - begin);
        return v;
    }

    const std::string& s_;
    std::size_t pos_{0};
};

}  // namespace

double parse_expression(const std::string& text) { return ExprParser(text).parse(); }

// ---------------------------------------------------------------------------

namespace {

class Reader {
public:
    explicit Reader(std::vector<Diagnostic>& diags) : diags_(diags) {}

    void error(const std::string& path, const std::string& msg) { diags_.push_back({"error", path, msg}); }
    void warning(const std::string& path, const std::string& msg) { diags_.push_back({"warning", path, msg}); }

    const json* section(const json& doc, const std::string& key) {
        if (!doc.contains(key)) return nullptr;
        const json& s = doc.at(key);
        if (!s.is_object()) {
            error(key, "must be an object");
            return nullptr;
        }
        return &s;
    }

    void known_keys(const json& obj, const std::string& prefix, std::initializer_list<const char*> keys) {
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& [k, v] : obj.items()) {
            if (!allowed.count(k)) warning(join(prefix, k), "unknown key ignored");
        }
    }

    double number(const json& v, const std::string& path) {
        try {
            if (v.is_number()) return v.get<double>();
            if (v.is_string()) return parse_expression(v.get<std::string>());
        } catch (const Error& e) {
            error(path, e.what());
            return 0.0;
        }
        error(path, "expected a number or expression");
        return 0.0;
    }

    void number(const json* obj, const std::string& prefix, const char* key, double& out) {
        if (obj && obj->contains(key)) out = number(obj->at(key), join(prefix, key));
    }

    void integer(const json* obj, const std::string& prefix, const char* key, int& out) {
        if (!obj || !obj->contains(key)) return;
        const json& v = obj->at(key);
        if (!v.is_number_integer()) {
            error(join(prefix, key), "expected an integer");
            return;
        }
        out = v.get<int>();
    }

    void boolean(const json* obj, const std::string& prefix, const char* key, bool& out) {
        if (!obj || !obj->contains(key)) return;
        const json& v = obj->at(key);
        if (!v.is_boolean()) {
            error(join(prefix, key), "expected true or false");
            return;
        }
        out = v.get<bool>();
    }

    std::optional<int> int_or_auto(const json* obj, const std::string& prefix, const char* key) {
        if (!obj || !obj->contains(key)) return std::nullopt;
        const json& v = obj->at(key);
        if (v.is_string() && v.get<std::string>() == "auto") return std::nullopt;
        if (v.is_number_integer()) return v.get<int>();
        error(join(prefix, key), "expected an integer or \"auto\"");
        return std::nullopt;
    }

    std::vector<double> numbers(const json& v, const std::string& path) {
        std::vector<double> out;
        if (!v.is_array()) {
            error(path, "expected an array");
            return out;
        }
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    std::vector<int> integers(const json& v, const std::string& path) {
        std::vector<int> out;
        if (!v.is_array()) {
            error(path, "expected an array");
            return out;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i].is_number_integer()) out.push_back(v[i].get<int>());
            else error(path + "[" + std::to_string(i) + "]", "expected an integer");
        }
        return out;
    }

    static std::string join(const std::string& prefix, const std::string& key) {
        return prefix.empty() ? key : prefix + "." + key;
    }

private:
    std::vector<Diagnostic>& diags_;
};

SolverKind solver_from(Reader& r, const json& v, const std::string& path) {
    if (v.is_string()) {
        const auto it = kSolvers.find(v.get<std::string>());
        if (it != kSolvers.end()) return it->second;
    }
    r.error(path, "expected one of heom, bornmarkov, gibbs");
    return SolverKind::Heom;
}

bool needs_hierarchy(const RunConfig& c) {
    switch (c.experiment) {
        case Experiment::CompareBm:
        case Experiment::Converge:
        case Experiment::Table1: return true;
        case Experiment::SteadyVsChi:
            return std::find(c.solvers.begin(), c.solvers.end(), SolverKind::Heom) != c.solvers.end();
        default: return c.solver == SolverKind::Heom;
    }
}

void check_semantics(const RunConfig& c, Reader& r) {
    const auto& s = c.sensor;
    if (!(s.delta > 0.0) || !std::isfinite(s.delta)) r.error("sensor.delta", "tunneling must be positive");
    if (!std::isfinite(s.epsilon)) r.error("sensor.epsilon", "bias must be finite");
    if (!(s.theta >= 0.0 && s.theta < kPi)) r.error("sensor.theta", "coupling angle must lie in [0, pi)");
    if (!std::isfinite(s.alpha) || !std::isfinite(s.varphi)) r.error("sensor", "initial-state angles must be finite");

    const auto& b = c.bath;
    if (!(b.chi >= 0.0) || !std::isfinite(b.chi)) r.error("bath.chi", "coupling strength must be nonnegative");
    if (!(b.omega_c > 0.0) || !std::isfinite(b.omega_c)) r.error("bath.omega_c", "cutoff must be positive");
    if (!(b.beta > 0.0) || !std::isfinite(b.beta)) r.error("bath.beta", "inverse temperature must be positive");

    const auto& g = c.grid;
    if (!(g.t_end > 0.0)) r.error("grid.t_end", "must be positive");
    if (!(g.dt >= 0.0)) r.error("grid.dt", "must be nonnegative (0 selects the default)");
    if (g.stride < 1) r.error("grid.stride", "must be at least 1");
    if (g.samples < 1) r.error("grid.samples", "must be at least 1");
    if (g.dt > 0.0 && g.t_end > 0.0) {
        const double n = g.t_end / g.dt;
        if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) r.error("grid.dt", "must divide grid.t_end");
    }
    if (!(c.bm_dt > 0.0)) r.error("bm_dt", "must be positive");
    if (!(c.delta_frac > 0.0 && c.delta_frac < 0.25)) r.error("delta_frac", "must lie in (0, 0.25)");

    const auto& t = c.truncation;
    if (t.k_max && *t.k_max < 0) r.error("truncation.k_max", "must be nonnegative");
    if (t.depth && *t.depth < 1) r.error("truncation.depth", "must be at least 1");
    if (!(t.k_tol > 0.0)) r.error("truncation.k_tol", "must be positive");
    if (!(t.k_ratio > 0.0)) r.error("truncation.k_ratio", "must be positive");
    if (t.k_cap < 0) r.error("truncation.k_cap", "must be nonnegative");
    if (!t.depth && t.depth_candidates.empty()) r.error("truncation.depth_candidates", "must be non-empty for auto depth");

    if (!(c.steady.window > 0.0)) r.error("steady.window", "must be positive");
    if (!(c.steady.tol > 0.0)) r.error("steady.tol", "must be positive");
    if (!(c.steady.max_time > c.steady.window)) r.error("steady.max_time", "must exceed the window");

    switch (c.experiment) {
        case Experiment::MaxQfiVsTheta:
            if (c.axis.empty()) r.error("theta_values", "sweep axis must be non-empty");
            for (const double th : c.axis) {
                if (!(th >= 0.0 && th < kPi)) r.error("theta_values", "coupling angles must lie in [0, pi)");
            }
            break;
        case Experiment::SteadyVsChi:
        case Experiment::Table1:
            if (c.axis.empty()) r.error("chi_values", "sweep axis must be non-empty");
            for (const double chi : c.axis) {
                if (!(chi >= 0.0)) r.error("chi_values", "couplings must be nonnegative");
            }
            if (c.experiment == Experiment::SteadyVsChi && c.solvers.empty()) r.error("solvers", "must be non-empty");
            break;
        case Experiment::Converge:
            if (!c.converge) {
                r.error("converge", "required for the converge experiment");
            }
            break;
        default: break;
    }
    if (c.converge) {
        if (c.converge->k_values.empty()) r.error("converge.k_values", "must be non-empty");
        if (c.converge->depth_values.empty()) r.error("converge.depth_values", "must be non-empty");
        if (c.converge->probe != "dynamics" && c.converge->probe != "steady") {
            r.error("converge.probe", "expected \"dynamics\" or \"steady\"");
        }
    }
    const bool time_resolved = c.experiment == Experiment::Dynamics || c.experiment == Experiment::QfiDynamics ||
                               c.experiment == Experiment::MaxQfiVsTheta;
    if (time_resolved && c.solver == SolverKind::Gibbs) {
        r.error("solver", "the gibbs solver has no dynamics; use heom or bornmarkov");
    }
}

}  // namespace

std::size_t hierarchy_memory_estimate(int n_terms, int depth) {
    const std::size_t n = heom::index_count(n_terms, depth);
    // State, four RK4 stages and a scratch copy, plus index and neighbour tables.
    const std::size_t per_aux = 6 * sizeof(QubitMatrix) + static_cast<std::size_t>(n_terms) * (2 + 2 * 4) + 4;
    if (n > SIZE_MAX / per_aux) return SIZE_MAX;
    return n * per_aux;
}

std::size_t parse_memory(const std::string& text) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw Error(ErrorKind::Config, "invalid memory size \"" + text + "\"");
    }
    std::string suffix = text.substr(pos);
    std::transform(suffix.begin(), suffix.end(), suffix.begin(), [](unsigned char ch) { return std::toupper(ch); });
    if (!suffix.empty() && suffix.back() == 'B') suffix.pop_back();
    if (!suffix.empty() && suffix.back() == 'I') suffix.pop_back();
    double scale = 1.0;
    if (suffix == "K") scale = 1024.0;
    else if (suffix == "M") scale = 1024.0 * 1024.0;
    else if (suffix == "G") scale = 1024.0 * 1024.0 * 1024.0;
    else if (!suffix.empty()) throw Error(ErrorKind::Config, "unknown memory suffix in \"" + text + "\"");
    if (!(value > 0.0)) throw Error(ErrorKind::Config, "memory size must be positive");
    return static_cast<std::size_t>(value * scale);
}

RunConfig read_config(const json& doc, std::vector<Diagnostic>& diags) {
    Reader r(diags);
    RunConfig c;
    if (!doc.is_object()) {
        r.error("", "config must be a JSON object");
        return c;
    }
    r.known_keys(doc, "", {"experiment", "name", "sensor", "bath", "solver", "solvers", "truncation", "grid",
                           "theta_values", "chi_values", "steady", "population_basis", "delta_frac", "lamb_shift",
                           "bm_dt", "converge", "sweep", "description"});

    if (!doc.contains("experiment") || !doc.at("experiment").is_string()) {
        r.error("experiment", "required string");
    } else {
        const auto it = kExperiments.find(doc.at("experiment").get<std::string>());
        if (it == kExperiments.end()) r.error("experiment", "unknown experiment \"" + doc.at("experiment").get<std::string>() + "\"");
        else c.experiment = it->second;
    }
    c.name = doc.contains("name") && doc.at("name").is_string() ? doc.at("name").get<std::string>()
                                                                 : std::string(to_string(c.experiment));
    if (c.name.empty() || c.name.find('/') != std::string::npos) r.error("name", "must be a non-empty file stem");

    if (const json* s = r.section(doc, "sensor")) {
        r.known_keys(*s, "sensor", {"epsilon", "delta", "theta", "alpha", "varphi"});
        r.number(s, "sensor", "epsilon", c.sensor.epsilon);
        r.number(s, "sensor", "delta", c.sensor.delta);
        r.number(s, "sensor", "theta", c.sensor.theta);
        r.number(s, "sensor", "alpha", c.sensor.alpha);
        r.number(s, "sensor", "varphi", c.sensor.varphi);
    }
    if (const json* b = r.section(doc, "bath")) {
        r.known_keys(*b, "bath", {"chi", "omega_c", "beta"});
        r.number(b, "bath", "chi", c.bath.chi);
        r.number(b, "bath", "omega_c", c.bath.omega_c);
        r.number(b, "bath", "beta", c.bath.beta);
    } else {
        r.error("bath", "required section");
    }
    if (doc.contains("solver")) c.solver = solver_from(r, doc.at("solver"), "solver");
    if (doc.contains("solvers")) {
        const json& v = doc.at("solvers");
        if (!v.is_array()) r.error("solvers", "expected an array");
        else
            for (std::size_t i = 0; i < v.size(); ++i) c.solvers.push_back(solver_from(r, v[i], "solvers[" + std::to_string(i) + "]"));
    } else {
        c.solvers = {SolverKind::Heom, SolverKind::BornMarkov, SolverKind::Gibbs};
    }
    if (const json* t = r.section(doc, "truncation")) {
        r.known_keys(*t, "truncation", {"k_max", "depth", "k_tol", "k_ratio", "k_cap", "depth_candidates", "depth_tol", "tail_correction"});
        c.truncation.k_max = r.int_or_auto(t, "truncation", "k_max");
        c.truncation.depth = r.int_or_auto(t, "truncation", "depth");
        r.number(t, "truncation", "k_tol", c.truncation.k_tol);
        r.number(t, "truncation", "k_ratio", c.truncation.k_ratio);
        r.integer(t, "truncation", "k_cap", c.truncation.k_cap);
        if (t->contains("depth_candidates")) c.truncation.depth_candidates = r.integers(t->at("depth_candidates"), "truncation.depth_candidates");
        r.number(t, "truncation", "depth_tol", c.truncation.depth_tol);
        r.boolean(t, "truncation", "tail_correction", c.truncation.tail_correction);
    }
    if (const json* g = r.section(doc, "grid")) {
        r.known_keys(*g, "grid", {"t_end", "dt", "stride", "samples"});
        r.number(g, "grid", "t_end", c.grid.t_end);
        r.number(g, "grid", "dt", c.grid.dt);
        r.integer(g, "grid", "stride", c.grid.stride);
        r.integer(g, "grid", "samples", c.grid.samples);
    }
    if (doc.contains("theta_values")) {
        if (c.experiment == Experiment::MaxQfiVsTheta) c.axis = r.numbers(doc.at("theta_values"), "theta_values");
        else r.warning("theta_values", "ignored by this experiment");
    }
    if (doc.contains("chi_values")) {
        if (c.experiment == Experiment::SteadyVsChi || c.experiment == Experiment::Table1) c.axis = r.numbers(doc.at("chi_values"), "chi_values");
        else r.warning("chi_values", "ignored by this experiment");
    }
    if (const json* s = r.section(doc, "steady")) {
        r.known_keys(*s, "steady", {"window", "tol", "max_time", "method"});
        r.number(s, "steady", "window", c.steady.window);
        r.number(s, "steady", "tol", c.steady.tol);
        r.number(s, "steady", "max_time", c.steady.max_time);
        if (s->contains("method")) {
            const json& m = s->at("method");
            if (m == "propagate" || m == "solve") c.steady.method = m.get<std::string>();
            else r.error("steady.method", "expected \"propagate\" or \"solve\"");
        }
    }
    if (doc.contains("population_basis")) {
        const json& v = doc.at("population_basis");
        if (v == "eigen") c.population_basis = PopulationBasis::Eigen;
        else if (v == "sigma_z") c.population_basis = PopulationBasis::SigmaZ;
        else r.error("population_basis", "expected \"eigen\" or \"sigma_z\"");
    }
    if (doc.contains("delta_frac")) c.delta_frac = r.number(doc.at("delta_frac"), "delta_frac");
    if (doc.contains("bm_dt")) c.bm_dt = r.number(doc.at("bm_dt"), "bm_dt");
    r.boolean(&doc, "", "lamb_shift", c.lamb_shift);
    if (const json* cv = r.section(doc, "converge")) {
        r.known_keys(*cv, "converge", {"k_values", "depth_values", "tol", "probe", "at_chi"});
        ConvergeSpec spec;
        if (cv->contains("k_values")) spec.k_values = r.integers(cv->at("k_values"), "converge.k_values");
        if (cv->contains("depth_values")) spec.depth_values = r.integers(cv->at("depth_values"), "converge.depth_values");
        r.number(cv, "converge", "tol", spec.tol);
        if (cv->contains("probe")) {
            if (cv->at("probe").is_string()) spec.probe = cv->at("probe").get<std::string>();
            else r.error("converge.probe", "expected a string");
        }
        if (cv->contains("at_chi")) spec.at_chi = r.number(cv->at("at_chi"), "converge.at_chi");
        c.converge = spec;
    }
    if (doc.contains("sweep")) {
        const json& sw = doc.at("sweep");
        if (!sw.is_object() || sw.empty()) r.error("sweep", "expected a non-empty object of dotted keys to arrays");
        else
            for (const auto& [k, v] : sw.items()) {
                if (!v.is_array() || v.empty()) r.error("sweep." + k, "sweep axis must be a non-empty array");
            }
        c.sweep = sw;
    }
    check_semantics(c, r);
    return c;
}

std::vector<Diagnostic> validate_config(const json& doc, std::size_t max_memory) {
    std::vector<Diagnostic> diags;
    const RunConfig c = read_config(doc, diags);
    const bool parsed = std::none_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == "error"; });
    if (!parsed) return diags;

    Reader r(diags);
    const int k = c.truncation.k_max ? *c.truncation.k_max : auto_k_max(c);
    const double x = 0.5 * c.bath.beta * c.bath.omega_c;
    if (std::abs(std::sin(x)) < kMatsubaraDegeneracyTol) {
        r.error("bath", "beta * omega_c is a multiple of 2 pi; the Drude amplitude is singular (DegenerateMatsubara)");
    }
    for (int l = 1; l <= k; ++l) {
        const double nu = 2.0 * kPi * l / c.bath.beta;
        if (std::abs(nu - c.bath.omega_c) < kMatsubaraDegeneracyTol * c.bath.omega_c) {
            r.error("bath", "Matsubara frequency " + std::to_string(l) + " coincides with omega_c (DegenerateMatsubara)");
        }
    }
    for (const auto& w : bath_warnings(c.bath)) r.warning("bath", w);

    if (needs_hierarchy(c)) {
        int depth = c.truncation.depth.value_or(0);
        if (!c.truncation.depth) {
            for (const int d : c.truncation.depth_candidates) depth = std::max(depth, d);
        }
        std::vector<std::pair<int, int>> shapes{{k + 1, depth}};
        if (c.converge) {
            for (const int kv : c.converge->k_values) {
                for (const int dv : c.converge->depth_values) shapes.emplace_back(kv + 1, dv);
            }
        }
        for (const auto& [terms, d] : shapes) {
            const std::size_t bytes = hierarchy_memory_estimate(terms, d);
            if (bytes > max_memory) {
                r.error("truncation", "hierarchy with k_max = " + std::to_string(terms - 1) + ", depth = " +
                                          std::to_string(d) + " needs about " + std::to_string(bytes >> 20) +
                                          " MiB, above the limit of " + std::to_string(max_memory >> 20) + " MiB");
            }
        }
    }
    return diags;
}

int auto_k_max(const RunConfig& c) {
    const Truncation& t = c.truncation;
    if (!t.tail_correction) return select_k_max(c.bath, t.k_tol, t.k_cap);
    const double omega = c.sensor.rabi_frequency();
    int k = 0;
    while (k < t.k_cap && 2.0 * kPi * (k + 1) / c.bath.beta < t.k_ratio * omega) ++k;
    return k;
}

RunConfig parse_config(const json& doc) {
    std::vector<Diagnostic> diags;
    RunConfig c = read_config(doc, diags);
    for (const auto& d : diags) {
        if (d.severity == "error") throw Error(ErrorKind::Config, d.path + ": " + d.message);
    }
    return c;
}

json to_json(const RunConfig& c) {
    json j;
    j["experiment"] = to_string(c.experiment);
    j["name"] = c.name;
    j["sensor"] = {{"epsilon", c.sensor.epsilon}, {"delta", c.sensor.delta}, {"theta", c.sensor.theta},
                   {"alpha", c.sensor.alpha},     {"varphi", c.sensor.varphi}};
    j["bath"] = {{"chi", c.bath.chi}, {"omega_c", c.bath.omega_c}, {"beta", c.bath.beta}};
    j["solver"] = to_string(c.solver);
    j["solvers"] = json::array();
    for (const auto s : c.solvers) j["solvers"].push_back(to_string(s));
    json t;
    t["k_max"] = c.truncation.k_max ? json(*c.truncation.k_max) : json("auto");
    t["depth"] = c.truncation.depth ? json(*c.truncation.depth) : json("auto");
    t["k_tol"] = c.truncation.k_tol;
    t["k_ratio"] = c.truncation.k_ratio;
    t["k_cap"] = c.truncation.k_cap;
    t["depth_candidates"] = c.truncation.depth_candidates;
    t["depth_tol"] = c.truncation.depth_tol;
    t["tail_correction"] = c.truncation.tail_correction;
    j["truncation"] = t;
    j["grid"] = {{"t_end", c.grid.t_end}, {"dt", c.grid.dt}, {"stride", c.grid.stride}, {"samples", c.grid.samples}};
    if (c.experiment == Experiment::MaxQfiVsTheta) j["theta_values"] = c.axis;
    if (c.experiment == Experiment::SteadyVsChi || c.experiment == Experiment::Table1) j["chi_values"] = c.axis;
    j["steady"] = {{"window", c.steady.window}, {"tol", c.steady.tol}, {"max_time", c.steady.max_time},
                  {"method", c.steady.method}};
    j["population_basis"] = to_string(c.population_basis);
    j["delta_frac"] = c.delta_frac;
    j["lamb_shift"] = c.lamb_shift;
    j["bm_dt"] = c.bm_dt;
    if (c.converge) {
        json cv{{"k_values", c.converge->k_values}, {"depth_values", c.converge->depth_values},
                {"tol", c.converge->tol}, {"probe", c.converge->probe}};
        if (c.converge->at_chi) cv["at_chi"] = *c.converge->at_chi;
        j["converge"] = cv;
    }
    if (!c.sweep.is_null()) j["sweep"] = c.sweep;
    return j;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open " + path);
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Config, path + ": " + e.what());
    }
}

}  // namespace qthermo::cli
