#include "volfill/cli.hpp"

#include <glob.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "volfill/oracle.hpp"

namespace volfill {

namespace {

std::string time_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", t);
    return buf;
}

void print_fit(std::ostream& os, const FitResult& fit) {
    os << "fit window: [" << format_full(fit.t_lo) << ", " << format_full(fit.t_hi) << "]\n"
       << "exponential: lambda = " << format_full(fit.lambda) << "  R2 = " << format_full(fit.r2_exp)
       << "\n"
       << "algebraic:   gamma  = " << format_full(fit.gamma) << "  R2 = " << format_full(fit.r2_alg)
       << "\n"
       << "verdict: " << to_string(fit.verdict) << "\n";
}

}  // namespace

RunOutputs run_scenario_to_dir(const Scenario& sc, const std::string& out_dir) {
    namespace fs = std::filesystem;
    RunOutputs out;
    fs::create_directories(out_dir);
    const std::string csv_path = out_dir + "/diagnostics.csv";
    std::ofstream csv(csv_path);
    if (!csv) {
        out.exit_code = 1;
        out.message = "cannot open " + csv_path;
        return out;
    }
    write_diagnostics_header(csv, sc.n);

    const Mesh1D mesh = sc.mesh();
    try {
        out.result = run_simulation(
            sc, [&csv](const DiagnosticsRecord& rec) { write_diagnostics_row(csv, rec); },
            [&](double t, const StateField& state) {
                write_snapshot_csv(out_dir + "/state_t" + time_tag(t) + ".csv", mesh, state);
            });
    } catch (const NonConvergenceError& e) {
        out.exit_code = 2;
        out.message = e.what();
        return out;
    }
    csv.close();

    std::vector<double> ts, hs;
    for (const DiagnosticsRecord& rec : out.result.records) {
        ts.push_back(rec.t);
        hs.push_back(rec.Hstar);
    }
    const double noise_floor = std::pow(1e4 * sc.newton_tol, 2);
    try {
        out.fit = decay_fit(ts, hs, std::nullopt, noise_floor);
        out.fit_valid = true;
    } catch (const std::invalid_argument&) {
        out.fit_valid = false;
    }

    std::ofstream summary(out_dir + "/summary.txt");
    const DiagnosticsRecord& last = out.result.records.back();
    summary << "scenario: " << sc.name << "\n"
            << "final time: " << format_full(last.t) << "\n"
            << "accepted steps: " << out.result.accepted_steps << "\n"
            << "Hstar(0): " << format_full(out.result.records.front().Hstar) << "\n"
            << "Hstar(T): " << format_full(last.Hstar) << "\n"
            << "sup_dev(T): " << format_full(last.sup_dev) << "\n"
            << "min state margin: " << format_full(out.result.min_state_margin) << "\n"
            << "max relative mass drift: " << format_full(out.result.max_mass_drift_rel) << "\n";
    if (out.fit_valid) print_fit(summary, out.fit);
    return out;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir, std::ostream& out,
            std::ostream& err) {
    Scenario sc;
    try {
        sc = load_scenario_file(scenario_path);
    } catch (const std::exception& e) {
        err << "error: " << scenario_path << ": " << e.what() << "\n";
        return 1;
    }
    std::string dir = out_dir;
    if (dir.empty()) dir = !sc.out_dir.empty() ? sc.out_dir : ("runs/" + sc.name);

    const RunOutputs ro = run_scenario_to_dir(sc, dir);
    if (ro.exit_code != 0) {
        err << "error: " << ro.message << "\n";
        return ro.exit_code;
    }
    const DiagnosticsRecord& last = ro.result.records.back();
    out << "scenario " << sc.name << ": " << ro.result.accepted_steps << " steps to t = "
        << format_full(last.t) << "\n"
        << "Hstar: " << format_full(ro.result.records.front().Hstar) << " -> "
        << format_full(last.Hstar) << "\n"
        << "sup_dev: " << format_full(ro.result.records.front().sup_dev) << " -> "
        << format_full(last.sup_dev) << "\n";
    if (ro.fit_valid) print_fit(out, ro.fit);
    out << "outputs in " << dir << "\n";
    return 0;
}

namespace {

std::vector<std::string> expand_patterns(const std::vector<std::string>& patterns,
                                         std::ostream& err) {
    std::vector<std::string> paths;
    for (const std::string& pat : patterns) {
        if (pat.find_first_of("*?[") != std::string::npos) {
            ::glob_t g{};
            const int rc = ::glob(pat.c_str(), 0, nullptr, &g);
            if (rc == 0) {
                for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.push_back(g.gl_pathv[i]);
            } else if (rc == GLOB_NOMATCH) {
                err << "warning: no matches for pattern '" << pat << "'\n";
            }
            ::globfree(&g);
        } else {
            paths.push_back(pat);
        }
    }
    return paths;
}

struct SweepRow {
    std::string path;
    std::string name;
    double alpha = std::numeric_limits<double>::quiet_NaN();
    int exit_code = 0;
    std::string message;
    FitResult fit;
    bool fit_valid = false;
};

}  // namespace

int cmd_sweep(const std::vector<std::string>& patterns, const std::string& out_root, int jobs,
              std::ostream& out, std::ostream& err) {
    namespace fs = std::filesystem;
    const std::vector<std::string> paths = expand_patterns(patterns, err);
    if (paths.empty()) {
        err << "error: no scenario files to sweep\n";
        return 1;
    }
    fs::create_directories(out_root);

    std::vector<SweepRow> rows(paths.size());
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(paths.size())));

    auto work = [&]() {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= paths.size()) return;
            SweepRow& row = rows[idx];
            row.path = paths[idx];
            try {
                const Scenario sc = load_scenario_file(paths[idx]);
                row.name = sc.name;
                row.alpha = sc.q_alpha;
                const RunOutputs ro = run_scenario_to_dir(sc, out_root + "/" + sc.name);
                row.exit_code = ro.exit_code;
                row.message = ro.message;
                row.fit = ro.fit;
                row.fit_valid = ro.fit_valid;
            } catch (const std::exception& e) {
                row.exit_code = 1;
                row.message = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
    for (std::thread& th : pool) th.join();

    std::ofstream rates(out_root + "/rates.csv");
    rates << "scenario,alpha,lambda,r2_exp,gamma,r2_alg,verdict\n";
    out << "scenario      alpha      lambda       gamma  verdict\n";
    int exit_code = 0;
    for (const SweepRow& row : rows) {
        if (row.exit_code != 0) {
            err << "error: " << row.path << ": " << row.message << "\n";
            exit_code = 1;
            continue;
        }
        rates << row.name << ',' << format_full(row.alpha) << ',' << format_full(row.fit.lambda)
              << ',' << format_full(row.fit.r2_exp) << ',' << format_full(row.fit.gamma) << ','
              << format_full(row.fit.r2_alg) << ',' << to_string(row.fit.verdict) << '\n';
        char line[160];
        std::snprintf(line, sizeof(line), "%-12s %6.3g %11.4e %11.4e  %s\n", row.name.c_str(),
                      row.alpha, row.fit.lambda, row.fit.gamma, to_string(row.fit.verdict).c_str());
        out << line;
    }
    return exit_code;
}

int cmd_check(const std::string& scenario_path, std::ostream& out, std::ostream& err) {
    Scenario sc;
    try {
        sc = load_scenario_file(scenario_path);
    } catch (const ValidationError& e) {
        err << "refused: " << e.what() << "\n";
        for (const auto& w : e.report.witnesses)
            err << "  witness: " << w.check << " at s = " << w.where << " (value " << w.value
                << ")\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    const HypothesisReport rep = hypothesis_report(sc.model(), 64);
    out << "scenario: " << sc.name << "\n"
        << "H3 (chi convex): " << (rep.h3_ok ? "ok" : "FAIL") << "\n"
        << "H4 (q admissible): " << (rep.h4_ok ? "ok" : "FAIL") << "\n"
        << "H5 (q convex): " << (rep.h5_convex_ok ? "ok" : "FAIL") << "\n"
        << "H5 (q/q' concave): " << (rep.h5_concave_ok ? "ok" : "FAIL") << "\n";
    if (rep.beta)
        out << "beta = " << format_full(*rep.beta) << ", c1 = " << format_full(*rep.c1) << "\n";
    else
        out << "beta, c1: inconclusive\n";
    out << "verdict: accepted\n";
    return 0;
}

void read_diagnostics_csv(const std::string& path, std::vector<double>& t,
                          std::vector<double>& hstar) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(path + ": empty file");
    std::vector<std::string> cols;
    {
        std::istringstream hs(line);
        std::string col;
        while (std::getline(hs, col, ',')) cols.push_back(col);
    }
    int t_col = -1, h_col = -1;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] == "t") t_col = static_cast<int>(i);
        if (cols[i] == "Hstar") h_col = static_cast<int>(i);
    }
    if (t_col < 0 || h_col < 0) throw std::runtime_error(path + ": needs t and Hstar columns");

    t.clear();
    hstar.clear();
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        int idx = 0;
        double tv = 0.0, hv = 0.0;
        while (std::getline(ls, field, ',')) {
            if (idx == t_col) tv = std::stod(field);
            if (idx == h_col) hv = std::stod(field);
            ++idx;
        }
        t.push_back(tv);
        hstar.push_back(hv);
    }
}

int cmd_fit(const std::string& csv_path, std::optional<std::pair<double, double>> window,
            std::ostream& out, std::ostream& err) {
    try {
        std::vector<double> t, hstar;
        read_diagnostics_csv(csv_path, t, hstar);
        const FitResult fit = decay_fit(t, hstar, window);
        print_fit(out, fit);
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_verify(std::uint64_t seed, std::ostream& out, std::ostream& err) {
    try {
        const VerificationReport rep = run_all_checks(seed);
        print_report(out, rep);
        return rep.all_pass() ? 0 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace volfill
