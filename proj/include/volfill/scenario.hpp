#ifndef VOLFILL_SCENARIO_HPP
#define VOLFILL_SCENARIO_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "volfill/mesh.hpp"
#include "volfill/model.hpp"
#include "volfill/scheme.hpp"

namespace volfill {

struct ParseError : std::runtime_error {
    ParseError(int line_, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what), line(line_) {}
    int line;
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what, HypothesisReport rep = {})
        : std::runtime_error(what), report(std::move(rep)) {}
    HypothesisReport report;
};

struct InitialSpec {
    enum class Kind { constant, cosine, table };
    Kind kind = Kind::constant;
    double a = 0.0;  // constant value, or cosine offset
    double b = 0.0;  // cosine amplitude
    int k = 1;       // cosine wavenumber: a + b cos(k pi x / L)
    std::vector<double> table;  // one value per cell
};

/// A fully validated run configuration.
struct Scenario {
    std::string name;
    double L = 1.0;
    int N = 100;
    int n = 1;
    std::vector<double> D;
    QFamily q{PowerQ{1.0}};
    double q_alpha = std::numeric_limits<double>::quiet_NaN();  // set for power q
    ChiFamily chi{ZeroChi{}};
    std::vector<InitialSpec> ic;
    double tau = 0.0;
    double tau_min = 0.0;  // defaults derived from tau when unset
    double tau_max = 0.0;
    double T = 0.0;
    int output_every_steps = 0;     // exactly one cadence is active
    double output_every_time = 0.0;
    std::vector<double> snapshot_times;
    bool entropy_guard = true;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    MobilityMean mobility_mean = MobilityMean::arithmetic;
    std::uint64_t seed = 0;
    std::string out_dir;  // optional `out =` key; the CLI --out flag wins

    ModelSpec model() const;
    Mesh1D mesh() const;
    StateField initial_state() const;
    StepperSettings stepper() const;
};

/// Strict parser: unknown keys are errors; every value is validated against the
/// model hypotheses (the violated hypothesis is cited on refusal).
Scenario parse_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);

}  // namespace volfill

#endif
