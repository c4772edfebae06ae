#ifndef VOLFILL_RUN_HPP
#define VOLFILL_RUN_HPP

#include <functional>
#include <string>
#include <vector>

#include "volfill/diagnostics.hpp"
#include "volfill/scenario.hpp"
#include "volfill/scheme.hpp"

namespace volfill {

/// Snapshots at the requested output times plus per-step solve statistics.
struct Trajectory {
    std::vector<double> snapshot_times;
    std::vector<StateField> snapshots;
    std::vector<SolveStats> step_stats;
};

struct RunResult {
    Trajectory trajectory;
    std::vector<DiagnosticsRecord> records;
    SimplexPoint uinf;
    double final_time = 0.0;
    int accepted_steps = 0;

    // run-wide structural monitors
    double min_state_margin = 1.0;        // min over the run of u_{k,i} and u0_k
    double max_mass_drift_rel = 0.0;      // per-species, relative to the initial mass
    double max_step_entropy_increase = 0.0;
    double max_entropy_ineq_violation = 0.0;  // dH + tau * dissipation, positive part
    double max_record_hstar_increase = 0.0;
};

using RecordSink = std::function<void(const DiagnosticsRecord&)>;
using SnapshotSink = std::function<void(double t, const StateField&)>;

/// Advances the scenario from t=0 to t=T, emitting a DiagnosticsRecord on the
/// configured cadence and snapshots at the configured times. Deterministic for
/// a fixed scenario. Throws NonConvergenceError with the failing time attached.
RunResult run_simulation(const Scenario& scenario, const RecordSink& on_record = {},
                         const SnapshotSink& on_snapshot = {});

}  // namespace volfill

#endif
