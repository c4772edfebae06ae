#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "volfill/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"volfill: finite-volume simulator and diagnostics for volume-filling "
                 "cross-diffusion systems"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, csv_path, window_str;
    std::vector<std::string> patterns;
    int jobs = 1;
    std::uint64_t seed = 0;

    CLI::App* run = app.add_subcommand("run", "run a scenario and write diagnostics");
    run->add_option("scenario", scenario_path, "scenario file")->required();
    run->add_option("--out", out_dir, "output directory");

    CLI::App* sweep = app.add_subcommand("sweep", "run many scenarios, aggregate a rates table");
    sweep->add_option("patterns", patterns, "scenario files or glob patterns")->required();
    sweep->add_option("--out", out_dir, "output root directory")->default_val("sweep_out");
    sweep->add_option("--jobs", jobs, "parallel jobs")->default_val(1);

    CLI::App* check = app.add_subcommand("check", "validate a scenario against the hypotheses");
    check->add_option("scenario", scenario_path, "scenario file")->required();

    CLI::App* fit = app.add_subcommand("fit", "fit decay laws to a diagnostics.csv");
    fit->add_option("csv", csv_path, "diagnostics CSV")->required();
    fit->add_option("--window", window_str, "fit window `a,b` (default: trusted last half)");

    CLI::App* verify = app.add_subcommand("verify", "run the independent verification suite");
    verify->add_option("--seed", seed, "RNG seed")->default_val(0);

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return volfill::cmd_run(scenario_path, out_dir, std::cout, std::cerr);
    if (sweep->parsed()) return volfill::cmd_sweep(patterns, out_dir, jobs, std::cout, std::cerr);
    if (check->parsed()) return volfill::cmd_check(scenario_path, std::cout, std::cerr);
    if (fit->parsed()) {
        std::optional<std::pair<double, double>> window;
        if (!window_str.empty()) {
            const auto comma = window_str.find(',');
            if (comma == std::string::npos) {
                std::cerr << "error: --window expects `a,b`\n";
                return 1;
            }
            try {
                window = {std::stod(window_str.substr(0, comma)),
                          std::stod(window_str.substr(comma + 1))};
            } catch (...) {
                std::cerr << "error: --window expects numbers `a,b`\n";
                return 1;
            }
        }
        return volfill::cmd_fit(csv_path, window, std::cout, std::cerr);
    }
    if (verify->parsed()) return volfill::cmd_verify(seed, std::cout, std::cerr);
    return 1;
}
