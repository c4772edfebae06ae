#include "volfill/run.hpp"

#include <algorithm>
#include <cmath>

namespace volfill {

namespace {

double state_margin(const StateField& u) {
    double m = 1.0;
    for (int k = 0; k < u.cells(); ++k) {
        double sum = 0.0;
        for (int i = 0; i < u.comps(); ++i) {
            m = std::min(m, u.at(k, i));
            sum += u.at(k, i);
        }
        m = std::min(m, 1.0 - sum);
    }
    return m;
}

}  // namespace

RunResult run_simulation(const Scenario& sc, const RecordSink& on_record,
                         const SnapshotSink& on_snapshot) {
    const ModelSpec model = sc.model();
    const Mesh1D mesh = sc.mesh();
    StateField u = sc.initial_state();
    nudge_into_interior(u);

    RunResult result;
    result.uinf = steady_state(u);
    DiagnosticsAccumulator acc(model, mesh, result.uinf);
    EntropyStepper stepper(model, mesh, sc.stepper());

    std::vector<double> mass0(sc.n, 0.0);
    for (int k = 0; k < mesh.N; ++k)
        for (int i = 0; i < sc.n; ++i) mass0[i] += u.at(k, i);
    for (double& m : mass0) m *= mesh.dx;

    const double t_eps = 1e-12 * std::max(1.0, sc.T);
    double last_record_t = -1.0;
    double prev_record_hstar = 0.0;
    bool have_record = false;

    auto emit_record = [&](double t, double tau, int iters) {
        const DiagnosticsRecord rec = acc.record(t, u, tau, iters);
        if (have_record)
            result.max_record_hstar_increase =
                std::max(result.max_record_hstar_increase, rec.Hstar - prev_record_hstar);
        prev_record_hstar = rec.Hstar;
        have_record = true;
        last_record_t = t;
        result.records.push_back(rec);
        if (on_record) on_record(rec);
    };
    auto emit_snapshot = [&](double t) {
        result.trajectory.snapshot_times.push_back(t);
        result.trajectory.snapshots.push_back(u);
        if (on_snapshot) on_snapshot(t, u);
    };

    result.min_state_margin = state_margin(u);
    emit_record(0.0, sc.tau, 0);
    std::size_t snap_idx = 0;
    while (snap_idx < sc.snapshot_times.size() && sc.snapshot_times[snap_idx] <= t_eps) {
        emit_snapshot(0.0);
        ++snap_idx;
    }

    double t = 0.0;
    double tau = sc.tau;
    int easy_streak = 0;
    int rec_idx = 1;

    while (t < sc.T - t_eps) {
        double target = sc.T;
        if (sc.output_every_time > 0.0)
            target = std::min(target, sc.output_every_time * rec_idx);
        if (snap_idx < sc.snapshot_times.size())
            target = std::min(target, sc.snapshot_times[snap_idx]);

        const double dt_request = std::min(tau, target - t);
        StepResult res;
        try {
            res = stepper.step(u, dt_request);
        } catch (NonConvergenceError& e) {
            throw NonConvergenceError(std::string(e.what()) + " (t = " + std::to_string(t) + ")",
                                      e.stats);
        }
        u = res.u_new;
        result.accepted_steps += 1;
        result.trajectory.step_stats.push_back(res.stats);

        result.min_state_margin = std::min(result.min_state_margin, state_margin(u));
        result.max_step_entropy_increase = std::max(result.max_step_entropy_increase,
                                                    res.entropy_new - res.entropy_old);
        result.max_entropy_ineq_violation =
            std::max(result.max_entropy_ineq_violation,
                     res.entropy_new - res.entropy_old + res.tau_used * res.dissipation);
        for (int i = 0; i < sc.n; ++i) {
            double m = 0.0;
            for (int k = 0; k < mesh.N; ++k) m += u.at(k, i);
            m *= mesh.dx;
            result.max_mass_drift_rel =
                std::max(result.max_mass_drift_rel,
                         std::abs(m - mass0[i]) / std::max(std::abs(mass0[i]), 1e-300));
        }

        if (res.tau_used == dt_request && dt_request == target - t) {
            t = target;  // land on the event exactly
        } else {
            t += res.tau_used;
        }

        // step-size control: shrink persists after failures, three easy
        // successes double tau up to tau_max
        if (res.tau_used < dt_request) {
            tau = res.tau_used;
            easy_streak = 0;
        } else {
            if (res.stats.newton_iters <= 4)
                ++easy_streak;
            else
                easy_streak = 0;
            if (easy_streak >= 3) {
                tau = std::min(2.0 * tau, sc.tau_max);
                easy_streak = 0;
            }
        }

        if (sc.output_every_time > 0.0) {
            const double rec_t = sc.output_every_time * rec_idx;
            if (t >= rec_t - t_eps) {
                t = std::min(rec_t, sc.T);  // snap accumulated time to the record grid
                emit_record(t, res.tau_used, res.stats.newton_iters);
                ++rec_idx;
            }
        } else if (sc.output_every_steps > 0 &&
                   result.accepted_steps % sc.output_every_steps == 0) {
            emit_record(t, res.tau_used, res.stats.newton_iters);
        }
        while (snap_idx < sc.snapshot_times.size() && t >= sc.snapshot_times[snap_idx] - t_eps) {
            emit_snapshot(t);
            ++snap_idx;
        }
    }

    if (last_record_t < sc.T - t_eps) {
        const SolveStats last = result.trajectory.step_stats.empty()
                                    ? SolveStats{}
                                    : result.trajectory.step_stats.back();
        emit_record(t, tau, last.newton_iters);
    }
    result.final_time = t;
    return result;
}

}  // namespace volfill
