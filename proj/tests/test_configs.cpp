// Every shipped config validates and runs end to end on a reduced grid.

#include <cmath>
#include <filesystem>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "qthermo/config.hpp"
#include "qthermo/runner.hpp"

using namespace qthermo::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path configs_dir() { return fs::path(QTHERMO_SOURCE_DIR) / "configs"; }

// Shrinks a config so a run takes seconds while keeping its experiment and
// sweep structure.
json reduce(json doc) {
    json& tr = doc["truncation"];
    tr["k_max"] = 1;
    tr["depth"] = 2;
    doc["grid"]["t_end"] = 2;
    doc["grid"]["samples"] = 10;
    if (doc.contains("chi_values")) doc["chi_values"] = {0.05, 0.1};
    if (doc.contains("theta_values")) doc["theta_values"] = {0, "pi/2"};
    if (doc.contains("converge")) {
        doc["converge"]["k_values"] = {0, 1};
        doc["converge"]["depth_values"] = {1, 2};
    }
    if (doc.contains("steady")) doc["steady"]["tol"] = 1e-6;
    if (doc.contains("sweep")) {
        for (auto& [key, axis] : doc["sweep"].items()) axis = json::array({axis.front(), axis.back()});
    }
    return doc;
}

class ShippedConfig : public ::testing::TestWithParam<std::string> {};

}  // namespace

TEST(ShippedConfigs, DirectoryCoversEveryFigure) {
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(configs_dir())) names.insert(e.path().filename().string());
    for (const char* n : {"fig2_qfi_dynamics.json", "fig3_max_qfi_vs_theta.json", "fig4_steady_vs_chi.json",
                          "fig5_steady_vs_chi.json", "table1.json", "fig6_compare_bm.json"}) {
        EXPECT_TRUE(names.count(n)) << n;
    }
}

TEST_P(ShippedConfig, ValidatesAtFullSize) {
    const json doc = load_json_file((configs_dir() / GetParam()).string());
    for (const auto& d : validate_config(doc, kDefaultMaxMemory)) {
        EXPECT_NE(d.severity, "error") << d.path << ": " << d.message;
    }
}

TEST_P(ShippedConfig, RunsOnReducedGrid) {
    const json doc = reduce(load_json_file((configs_dir() / GetParam()).string()));
    RunOptions opts;
    opts.output_dir = fs::temp_directory_path() / ("qthermo_cfg_" + fs::path(GetParam()).stem().string());
    fs::remove_all(opts.output_dir);
    const RunResult r = doc.contains("sweep") ? sweep(doc, opts) : run(doc, opts);
    ASSERT_FALSE(r.files.empty());
    for (const auto& f : r.files) {
        EXPECT_TRUE(fs::exists(f)) << f;
        if (f.extension() != ".csv") continue;
        const std::string csv = read_file(f);
        EXPECT_EQ(csv.find("nan"), std::string::npos) << f;
        EXPECT_GT(std::count(csv.begin(), csv.end(), '\n'), 1) << f;
    }
}

INSTANTIATE_TEST_SUITE_P(All, ShippedConfig,
                         ::testing::Values("fig2_qfi_dynamics.json", "fig3_max_qfi_vs_theta.json",
                                           "fig4_steady_vs_chi.json", "fig5_steady_vs_chi.json", "table1.json",
                                           "fig6_compare_bm.json"),
                         [](const auto& info) { return fs::path(info.param).stem().string(); });
