#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "amm/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Scenario runner for automated market maker analyses"};
    app.require_subcommand(1);

    std::string run_file;
    std::string out_dir;
    unsigned parallel = 1;
    auto* run = app.add_subcommand("run", "Execute a scenario and write CSV series and a receipt log");
    run->add_option("file", run_file, "Scenario JSON file")->required();
    run->add_option("--out", out_dir, "Output directory (overrides the scenario's)");
    run->add_option("--parallel", parallel, "Worker threads per analysis action")->check(CLI::Range(1u, 256u));

    std::string validate_file;
    auto* validate = app.add_subcommand("validate", "Check a scenario without executing it");
    validate->add_option("file", validate_file, "Scenario JSON file")->required();

    auto* version = app.add_subcommand("version", "Print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : amm::scenario::kExitParseError;
    }

    if (*run) {
        amm::scenario::RunOptions opts;
        if (!out_dir.empty()) opts.output_directory = out_dir;
        opts.parallelism = parallel;
        return amm::scenario::run_scenario_file(run_file, opts, std::cout, std::cerr);
    }
    if (*validate) return amm::scenario::validate_scenario_file(validate_file, std::cout, std::cerr);
    if (*version) {
        std::cout << "ammctl " << AMM_VERSION << '\n';
        return 0;
    }
    return 0;
}
