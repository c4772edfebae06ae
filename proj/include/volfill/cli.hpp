#ifndef VOLFILL_CLI_HPP
#define VOLFILL_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "volfill/diagnostics.hpp"
#include "volfill/run.hpp"
#include "volfill/scenario.hpp"

namespace volfill {

struct RunOutputs {
    int exit_code = 0;  // 0 clean, 1 validation failure, 2 solver abort
    std::string message;
    RunResult result;
    FitResult fit;
    bool fit_valid = false;
};

/// Runs a parsed scenario, writing diagnostics.csv, snapshots, and summary.txt
/// into out_dir.
RunOutputs run_scenario_to_dir(const Scenario& scenario, const std::string& out_dir);

int cmd_run(const std::string& scenario_path, const std::string& out_dir, std::ostream& out,
            std::ostream& err);

int cmd_sweep(const std::vector<std::string>& patterns, const std::string& out_root, int jobs,
              std::ostream& out, std::ostream& err);

int cmd_check(const std::string& scenario_path, std::ostream& out, std::ostream& err);

int cmd_fit(const std::string& csv_path, std::optional<std::pair<double, double>> window,
            std::ostream& out, std::ostream& err);

int cmd_verify(std::uint64_t seed, std::ostream& out, std::ostream& err);

/// Reads the `t` and `Hstar` columns of a diagnostics.csv.
void read_diagnostics_csv(const std::string& path, std::vector<double>& t,
                          std::vector<double>& hstar);

}  // namespace volfill

#endif
