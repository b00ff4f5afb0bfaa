// Command-line front end: run, validate and sweep experiment configs.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qthermo/config.hpp"
#include "qthermo/runner.hpp"

namespace {

constexpr const char* kOutputEnv = "QTHERMO_OUTPUT_DIR";

int report(const qthermo::Error& e) {
    std::cerr << "qthermo: " << e.what() << '\n';
    return qthermo::cli::exit_code(e.kind());
}

}  // namespace

int main(int argc, char** argv) {
    using namespace qthermo;

    CLI::App app{"Qubit thermometry simulations: exact hierarchy dynamics, Born-Markov dynamics, "
                 "quantum Fisher information and frequency renormalization."};
    app.set_version_flag("--version", cli::software_version());
    app.require_subcommand(1);

    std::string output_dir;
    int threads = 1;
    std::uint64_t seed = 0;
    std::string max_memory = "2G";
    bool quiet = false;
    app.add_option("--output-dir,-o", output_dir, std::string("Directory for CSV and manifest files (default: $") +
                                                     kOutputEnv + " or the current directory)");
    app.add_option("--threads,-j", threads, "Worker threads for offset runs")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Reserved; the simulations are deterministic");
    app.add_option("--max-memory", max_memory, "Hierarchy memory limit, e.g. 512M or 4G");
    app.add_flag("--quiet,-q", quiet, "Suppress progress messages");

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run an experiment config or replay a manifest");
    run_cmd->add_option("config", config_path, "Config or manifest JSON")->required()->check(CLI::ExistingFile);
    auto* validate_cmd = app.add_subcommand("validate", "Check a config without running it");
    validate_cmd->add_option("config", config_path, "Config JSON")->required()->check(CLI::ExistingFile);
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a config once per point of its sweep block");
    sweep_cmd->add_option("config", config_path, "Config JSON")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        cli::RunOptions opts;
        if (output_dir.empty()) {
            const char* env = std::getenv(kOutputEnv);
            output_dir = env && *env ? env : ".";
        }
        opts.output_dir = output_dir;
        opts.threads = threads;
        opts.seed = seed;
        opts.max_memory = cli::parse_memory(max_memory);
        opts.log = quiet ? nullptr : &std::cerr;

        const nlohmann::json doc = cli::load_json_file(config_path);

        if (*validate_cmd) {
            const auto diags = cli::validate_config(doc, opts.max_memory);
            nlohmann::json out = nlohmann::json::array();
            bool failed = false;
            for (const auto& d : diags) {
                out.push_back(cli::to_json(d));
                failed = failed || d.severity == "error";
            }
            std::cout << nlohmann::json{{"valid", !failed}, {"diagnostics", out}}.dump(2) << '\n';
            return failed ? 2 : 0;
        }
        const cli::RunResult result = *sweep_cmd ? cli::sweep(doc, opts) : cli::run(doc, opts);
        for (const auto& f : result.files) std::cout << f.string() << '\n';
        return 0;
    } catch (const Error& e) {
        return report(e);
    } catch (const std::exception& e) {
        std::cerr << "qthermo: " << e.what() << '\n';
        return 1;
    }
}
