// Acceptance suite: exercises every qualification criterion end to end and
// prints one PASS/FAIL line per criterion. Exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "volfill/cli.hpp"
#include "volfill/diagnostics.hpp"
#include "volfill/oracle.hpp"
#include "volfill/run.hpp"
#include "volfill/scenario.hpp"

using namespace volfill;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

void report(int criterion, const std::string& label, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, label.c_str(),
                detail.c_str());
    if (!pass) ++g_failures;
}

std::string scenario_text(const std::string& name, double alpha, const std::string& ic1,
                          const std::string& ic2) {
    std::ostringstream os;
    os << "name = " << name << "\n"
       << "L = 1.0\nN = 100\nn = 2\nD.1 = 1.0\nD.2 = 0.5\n"
       << "q = power " << alpha << "\n"
       << "chi = zero\n"
       << "ic.1 = " << ic1 << "\nic.2 = " << ic2 << "\n"
       << "tau = 1e-3\nT = 50\nentropy_guard = on\nnewton_tol = 1e-13\n"
       << "output.every_time = 0.1\n";
    return os.str();
}

std::string write_file(const fs::path& path, const std::string& body) {
    std::ofstream os(path);
    os << body;
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

const DiagnosticsRecord& record_at(const RunResult& run, double t) {
    const DiagnosticsRecord* best = &run.records.front();
    for (const DiagnosticsRecord& rec : run.records)
        if (std::abs(rec.t - t) < std::abs(best->t - t)) best = &rec;
    return *best;
}

char buf[512];

}  // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / "volfill_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);

    const std::string s1_text =
        scenario_text("S1", 2, "cosine 0.3 0.2 1", "cosine 0.3 -0.1 1");
    const std::string s0_text =
        scenario_text("S0", 1, "cosine 0.3 0.2 1", "cosine 0.3 -0.1 1");
    const std::string s1_path = write_file(work / "s1.cfg", s1_text);
    const std::string s0_path = write_file(work / "s0.cfg", s0_text);
    std::vector<std::string> sweep_paths;
    for (int a = 1; a <= 4; ++a) {
        const std::string text = scenario_text("A" + std::to_string(a), a, "cosine 0.4 0.1 1",
                                               "cosine 0.4 -0.05 1");
        sweep_paths.push_back(write_file(work / ("sweep_a" + std::to_string(a) + ".cfg"), text));
    }

    // ----- S1 reference run (shared by criteria 1, 2, 4, 7) -----
    const Scenario s1 = load_scenario_file(s1_path);
    const auto t0 = std::chrono::steady_clock::now();
    const RunOutputs s1_run = run_scenario_to_dir(s1, (work / "run_s1_a").string());
    const double s1_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (s1_run.exit_code != 0) {
        std::printf("[FAIL] criterion 1: S1 run aborted (%s)\n", s1_run.message.c_str());
        return 1;
    }
    const RunResult& s1r = s1_run.result;

    // ----- criterion 1: structural invariants -----
    {
        const bool box = s1r.min_state_margin > 0.0;
        const bool mass = s1r.max_mass_drift_rel <= 1e-10;
        const bool mono = s1r.max_step_entropy_increase <= 1e-10 &&
                          s1r.max_record_hstar_increase <= 1e-10;
        const bool fast = s1_seconds < 120.0;
        std::snprintf(buf, sizeof(buf),
                      "min margin %.2e, mass drift %.2e, max entropy increase %.2e, %.1fs",
                      s1r.min_state_margin, s1r.max_mass_drift_rel,
                      std::max(s1r.max_step_entropy_increase, s1r.max_record_hstar_increase),
                      s1_seconds);
        report(1, "open simplex, mass conservation, monotone entropy on S1",
               box && mass && mono && fast, buf);
    }

    // ----- criterion 2: convergence observation -----
    const Scenario s0 = load_scenario_file(s0_path);
    const RunOutputs s0_run = run_scenario_to_dir(s0, (work / "run_s0").string());
    {
        bool pass = s0_run.exit_code == 0;
        const DiagnosticsRecord& first = s1r.records.front();
        const DiagnosticsRecord& last = s1r.records.back();
        const bool dev_ok = last.sup_dev <= 0.1 * first.sup_dev;
        const bool hstar_ok = last.Hstar <= 1e-2 * first.Hstar;
        bool s0_ok = false;
        if (pass) {
            const DiagnosticsRecord& f0 = s0_run.result.records.front();
            const DiagnosticsRecord& l0 = s0_run.result.records.back();
            s0_ok = l0.Hstar <= 1e-6 * f0.Hstar;
        }
        std::snprintf(buf, sizeof(buf),
                      "S1 sup_dev %.2e -> %.2e, Hstar %.2e -> %.2e; S0 Hstar ratio %.2e",
                      first.sup_dev, last.sup_dev, first.Hstar, last.Hstar,
                      pass ? s0_run.result.records.back().Hstar /
                                 s0_run.result.records.front().Hstar
                           : std::nan(""));
        report(2, "decay toward the constant steady state", pass && dev_ok && hstar_ok && s0_ok,
               buf);
    }

    // ----- criterion 3: rate dichotomy -----
    {
        bool pass = s0_run.exit_code == 0 && s0_run.fit_valid;
        std::string detail;
        if (pass) {
            const FitResult& f0 = s0_run.fit;
            pass = f0.verdict == FitVerdict::exponential && f0.r2_exp >= 0.99;
            detail = "S0 lambda " + std::to_string(f0.lambda) + " (R2 " +
                     std::to_string(f0.r2_exp) + ")";
        }

        std::ostringstream sweep_out, sweep_err;
        const int sweep_rc =
            cmd_sweep(sweep_paths, (work / "sweep").string(), 2, sweep_out, sweep_err);
        pass = pass && sweep_rc == 0;

        std::vector<double> lambdas;
        if (sweep_rc == 0) {
            std::ifstream rates(work / "sweep" / "rates.csv");
            std::string line;
            std::getline(rates, line);  // header
            while (std::getline(rates, line)) {
                std::istringstream ls(line);
                std::string field;
                int idx = 0;
                while (std::getline(ls, field, ',')) {
                    if (idx == 2) lambdas.push_back(std::stod(field));
                    ++idx;
                }
            }
        }
        bool decreasing = lambdas.size() == 4;
        for (std::size_t i = 0; i + 1 < lambdas.size(); ++i)
            decreasing = decreasing && lambdas[i] > lambdas[i + 1];
        pass = pass && decreasing;

        bool subexp = false;
        if (sweep_rc == 0) {
            std::vector<double> t, h;
            read_diagnostics_csv((work / "sweep" / "A4" / "diagnostics.csv").string(), t, h);
            const FitResult mid = decay_fit(t, h, std::make_pair(12.5, 25.0));
            const FitResult late = decay_fit(t, h, std::make_pair(25.0, 50.0));
            subexp = late.lambda < mid.lambda;
            std::snprintf(buf, sizeof(buf),
                          "; lambda(alpha): %.3g %.3g %.3g %.3g; A4 late %.4g < mid %.4g",
                          lambdas.size() == 4 ? lambdas[0] : std::nan(""),
                          lambdas.size() == 4 ? lambdas[1] : std::nan(""),
                          lambdas.size() == 4 ? lambdas[2] : std::nan(""),
                          lambdas.size() == 4 ? lambdas[3] : std::nan(""), late.lambda,
                          mid.lambda);
            detail += buf;
        }
        report(3, "exponential verdict on S0, rate collapse over the alpha sweep",
               pass && subexp, detail);
    }

    // ----- criterion 4: proof-machinery functionals on S1 -----
    {
        const DiagnosticsRecord& half = record_at(s1r, 25.0);
        const DiagnosticsRecord& last = s1r.records.back();
        const bool f1_ok = last.f1_int <= 0.1 * half.f1_int;
        const bool f2_ok = last.f2_int <= 0.1 * half.f2_int;
        const bool gap_ok = last.keygap_sup <= 0.1 * half.keygap_sup;
        bool ckp_ok = true, bregman_ok = true;
        for (const DiagnosticsRecord& rec : s1r.records) {
            ckp_ok = ckp_ok && rec.ckp_margin >= -1e-12;
            bregman_ok = bregman_ok &&
                         std::abs(rec.Hstar - rec.hstar_direct) <=
                             1e-10 * std::max({1.0, std::abs(rec.Hstar),
                                               std::abs(rec.hstar_direct)});
        }
        std::snprintf(buf, sizeof(buf),
                      "f1 %.1e->%.1e, f2 %.1e->%.1e, keygap %.1e->%.1e, ckp>=-1e-12 %s",
                      half.f1_int, last.f1_int, half.f2_int, last.f2_int, half.keygap_sup,
                      last.keygap_sup, ckp_ok ? "yes" : "no");
        report(4, "f1, f2 and the key gap decay; CKP margin and Bregman consistency",
               f1_ok && f2_ok && gap_ok && ckp_ok && bregman_ok, buf);
    }

    // ----- criterion 5: oracle equivalence -----
    {
        const auto tv0 = std::chrono::steady_clock::now();
        const VerificationReport rep = run_all_checks(1000);
        const double verify_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - tv0).count();
        bool pass = rep.all_pass() && verify_seconds < 60.0;
        double flux_dev = 0.0, gap = 0.0, ratio_dev = 0.0;
        for (const CheckResult& c : rep.checks) {
            if (c.name.rfind("flux_identity", 0) == 0) flux_dev = std::max(flux_dev, c.max_dev);
            if (c.name.rfind("implicit vs explicit sup gap", 0) == 0) gap = c.max_dev;
            if (c.name.rfind("implicit vs explicit first-order", 0) == 0) ratio_dev = c.max_dev;
        }
        std::snprintf(buf, sizeof(buf),
                      "flux dev %.1e, sup gap %.2e, halving ratio dev %.2f, %.1fs", flux_dev, gap,
                      ratio_dev, verify_seconds);
        report(5, "independent oracles agree at their stated thresholds", pass, buf);
    }

    // ----- criterion 6: hypothesis gate -----
    {
        bool pass = true;
        std::string detail;
        for (double alpha : {1.0, 1.5, 2.0, 4.0}) {
            std::ostringstream body;
            body << scenario_text("gate", alpha, "cosine 0.3 0.2 1", "cosine 0.3 -0.1 1");
            const std::string path = write_file(work / "gate.cfg", body.str());
            std::ostringstream out, err;
            const int rc = cmd_check(path, out, err);
            pass = pass && rc == 0;
            const ModelSpec m = load_scenario_file(path).model();
            const HypothesisReport rep = hypothesis_report(m, 64);
            pass = pass && rep.beta.has_value() && *rep.beta == 1.0 && *rep.c1 == alpha;
        }
        {
            const std::string path = write_file(
                work / "gate_bad.cfg",
                scenario_text("gate", 0.5, "cosine 0.3 0.2 1", "cosine 0.3 -0.1 1"));
            std::ostringstream out, err;
            const int rc = cmd_check(path, out, err);
            pass = pass && rc == 1;
            pass = pass && err.str().find("witness") != std::string::npos;
            detail = "alpha in {1, 1.5, 2, 4} accepted with beta=1, c1=alpha; 0.5 refused";
        }
        report(6, "hypothesis gate accepts admissible q and rejects alpha = 0.5", pass, detail);
    }

    // ----- criterion 7: determinism -----
    {
        const RunOutputs rerun = run_scenario_to_dir(s1, (work / "run_s1_b").string());
        bool pass = rerun.exit_code == 0;
        const std::string a = slurp((work / "run_s1_a" / "diagnostics.csv").string());
        const std::string b = slurp((work / "run_s1_b" / "diagnostics.csv").string());
        pass = pass && !a.empty() && a == b;
        std::snprintf(buf, sizeof(buf), "diagnostics.csv byte-identical across runs (%zu bytes)",
                      a.size());
        report(7, "replays are bit-identical", pass, buf);
    }

    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
}
