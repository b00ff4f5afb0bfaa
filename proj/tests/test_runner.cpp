#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "qthermo/csv.hpp"
#include "qthermo/runner.hpp"

using namespace qthermo;
using namespace qthermo::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qthermo_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json small_dynamics() {
    return json::parse(R"({
        "experiment": "dynamics",
        "name": "dyn",
        "solver": "bornmarkov",
        "sensor": {"epsilon": 0.5, "theta": "3*pi/8"},
        "bath": {"chi": 0.06, "omega_c": 10, "beta": 0.25},
        "grid": {"t_end": 4, "samples": 40}
    })");
}

json load(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

}  // namespace

TEST(Csv, Formatting) {
    CsvTable t({"a", "b"});
    t.add_row({1.0 / 3.0, 1e-20});
    t.add_row({-2.5, std::numeric_limits<double>::infinity()});
    EXPECT_EQ(t.str(), "a,b\n0.333333333333,1e-20\n-2.5,inf\n");
    EXPECT_EQ(format_number(123456789012345.0), "1.23456789012e+14");
    EXPECT_THROW(t.add_row({1.0}), Error);
}

TEST(Runner, WritesCsvAndManifest) {
    RunOptions opts;
    opts.output_dir = scratch("write");
    const RunResult r = run(small_dynamics(), opts);
    ASSERT_EQ(r.files.size(), 2u);
    const std::string csv = read_file(opts.output_dir / "dyn.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,rx,ry,rz,sz");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 42);
    const json m = load(opts.output_dir / "dyn.manifest.json");
    EXPECT_EQ(m["format"], "qthermo-manifest");
    EXPECT_EQ(m["software"]["version"], software_version());
    EXPECT_EQ(m["outputs"][0]["fnv1a64"], fnv1a64_hex(csv));
    EXPECT_EQ(m["outputs"][0]["rows"], 41);
    EXPECT_TRUE(m["run"].contains("wall_time_s"));
    EXPECT_GT(m["config"]["grid"]["dt"].get<double>(), 0.0);
}

TEST(Runner, ManifestReplayIsByteIdentical) {
    RunOptions opts;
    opts.output_dir = scratch("replay_a");
    json doc = small_dynamics();
    doc["solver"] = "heom";
    doc["truncation"] = {{"k_max", "auto"}, {"depth", "auto"}, {"depth_candidates", {2, 3, 4}}, {"depth_tol", 1e-2},
                         {"tail_correction", true}};
    run(doc, opts);
    const std::string first = read_file(opts.output_dir / "dyn.csv");
    const json manifest = load(opts.output_dir / "dyn.manifest.json");
    EXPECT_TRUE(manifest["evidence"].contains("depth_selection"));

    RunOptions again;
    again.output_dir = scratch("replay_b");
    again.threads = 2;
    const RunResult r = run(manifest, again);
    EXPECT_EQ(read_file(again.output_dir / "dyn.csv"), first);
    EXPECT_TRUE(r.manifest["run"]["replay"].get<bool>());
    EXPECT_EQ(r.manifest["config"], manifest["config"]);
}

TEST(Runner, SweepWritesOnePairPerPoint) {
    RunOptions opts;
    opts.output_dir = scratch("sweep");
    json doc = small_dynamics();
    doc["sweep"] = {{"bath.omega_c", {5, 10}}, {"sensor.theta", {0, "pi/2"}}};
    const RunResult r = sweep(doc, opts);
    EXPECT_EQ(r.files.size(), 9u);
    EXPECT_TRUE(fs::exists(opts.output_dir / "dyn_omega_c-5_theta-0.csv"));
    EXPECT_TRUE(fs::exists(opts.output_dir / "dyn_omega_c-10_theta-pi_2.manifest.json"));
    const json s = load(opts.output_dir / "dyn.sweep.json");
    EXPECT_EQ(s["points"].size(), 4u);
    EXPECT_THROW(sweep(small_dynamics(), opts), Error);
}

TEST(Runner, ExitCodes) {
    EXPECT_EQ(exit_code(ErrorKind::Config), 2);
    EXPECT_EQ(exit_code(ErrorKind::HierarchyTooLarge), 2);
    EXPECT_EQ(exit_code(ErrorKind::NoConvergence), 3);
    EXPECT_EQ(exit_code(ErrorKind::NoSteadyState), 3);
    EXPECT_EQ(exit_code(ErrorKind::DegenerateMatsubara), 4);
    EXPECT_EQ(exit_code(ErrorKind::DegeneratePopulation), 4);
}

TEST(Runner, RejectsInvalidConfigBeforeRunning) {
    RunOptions opts;
    opts.output_dir = scratch("invalid");
    json doc = small_dynamics();
    doc["sensor"]["theta"] = 4.0;
    try {
        run(doc, opts);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
    EXPECT_FALSE(fs::exists(opts.output_dir / "dyn.csv"));
}

TEST(Runner, ThreadCountDoesNotChangeOutput) {
    json doc = json::parse(R"({
        "experiment": "qfi-dynamics", "name": "q", "solver": "heom",
        "sensor": {"epsilon": 0.5},
        "bath": {"chi": 0.06, "omega_c": 4, "beta": 0.5},
        "truncation": {"k_max": 1, "depth": 3, "tail_correction": true},
        "grid": {"t_end": 2, "samples": 20}
    })");
    RunOptions a;
    a.output_dir = scratch("threads_a");
    RunOptions b;
    b.output_dir = scratch("threads_b");
    b.threads = 4;
    run(doc, a);
    run(doc, b);
    EXPECT_EQ(read_file(a.output_dir / "q.csv"), read_file(b.output_dir / "q.csv"));
}

#ifdef QTHERMO_CLI
namespace {

int run_cli(const std::string& args) {
    const int status = std::system((std::string(QTHERMO_CLI) + " --quiet " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& doc) {
    const fs::path p = dir / name;
    std::ofstream(p) << doc.dump();
    return p;
}

}  // namespace

TEST(Cli, ExitStatuses) {
    const fs::path dir = scratch("cli");
    const auto ok = write_config(dir, "ok.json", small_dynamics());
    EXPECT_EQ(run_cli("validate " + ok.string()), 0);
    EXPECT_EQ(run_cli("-o " + (dir / "out").string() + " run " + ok.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "dyn.csv"));

    json bad = small_dynamics();
    bad["sensor"]["theta"] = "3*pi/2";
    const auto badp = write_config(dir, "bad.json", bad);
    EXPECT_EQ(run_cli("validate " + badp.string()), 2);
    EXPECT_EQ(run_cli("run " + badp.string()), 2);
    EXPECT_EQ(run_cli("run " + (dir / "missing.json").string()), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);

    // At very low temperature the upper population underflows.
    json degenerate = json::parse(R"({
        "experiment": "steady-vs-chi", "name": "deg", "solvers": ["gibbs"],
        "sensor": {"epsilon": 0.5}, "bath": {"chi": 0.0, "omega_c": 0.5, "beta": 100},
        "chi_values": [0.0]
    })");
    const auto degp = write_config(dir, "deg.json", degenerate);
    EXPECT_EQ(run_cli("-o " + dir.string() + " run " + degp.string()), 4);

    // An unreachable depth tolerance exhausts the candidate list.
    json stall = small_dynamics();
    stall["solver"] = "heom";
    stall["truncation"] = {{"k_max", 1}, {"depth", "auto"}, {"depth_candidates", {1, 2}}, {"depth_tol", 1e-14}};
    stall["bath"]["chi"] = 0.3;
    const auto stallp = write_config(dir, "stall.json", stall);
    EXPECT_EQ(run_cli("-o " + dir.string() + " run " + stallp.string()), 3);

    // Environment variable sets the default output directory.
    const fs::path envdir = dir / "from_env";
    const std::string cmd = "QTHERMO_OUTPUT_DIR=" + envdir.string() + " " + QTHERMO_CLI + " --quiet run " + ok.string() +
                            " > /dev/null 2>&1";
    EXPECT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(envdir / "dyn.csv"));
}
#endif
