#include "volfill/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "volfill/numerics.hpp"

namespace volfill {

namespace {

struct RawEntry {
    std::string value;
    int line = 0;
    bool used = false;
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

double parse_double(const RawEntry& e, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(e.value, &pos);
        if (pos != e.value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw ParseError(e.line, key + ": expected a number, got '" + e.value + "'");
    }
}

int parse_int(const RawEntry& e, const std::string& key) {
    const double v = parse_double(e, key);
    if (v != std::floor(v)) throw ParseError(e.line, key + ": expected an integer");
    return static_cast<int>(v);
}

bool parse_bool(const RawEntry& e, const std::string& key) {
    if (e.value == "on" || e.value == "true" || e.value == "1") return true;
    if (e.value == "off" || e.value == "false" || e.value == "0") return false;
    throw ParseError(e.line, key + ": expected on/off");
}

std::vector<double> read_table_file(const std::string& path, int line) {
    std::ifstream is(path);
    if (!is) throw ParseError(line, "cannot open table file '" + path + "'");
    std::vector<double> vals;
    std::string tok;
    while (is >> tok) {
        try {
            vals.push_back(std::stod(tok));
        } catch (...) {
            throw ParseError(line, "bad number '" + tok + "' in table file '" + path + "'");
        }
    }
    return vals;
}

// two-column (s, q) monotone table -> pchip evaluators
CustomQ custom_q_from_table(const std::string& path, int line) {
    const std::vector<double> flat = read_table_file(path, line);
    if (flat.size() < 6 || flat.size() % 2 != 0)
        throw ParseError(line, "custom q table needs >= 3 (s, q) pairs");
    std::vector<double> s, q;
    for (std::size_t i = 0; i < flat.size(); i += 2) {
        s.push_back(flat[i]);
        q.push_back(flat[i + 1]);
    }
    if (std::abs(s.front()) > 1e-12 || std::abs(s.back() - 1.0) > 1e-12)
        throw ParseError(line, "custom q table must cover s = 0 .. 1");
    auto curve = std::make_shared<PchipCurve>(std::move(s), std::move(q));
    CustomQ out;
    out.q = [curve](double x) { return curve->value(x); };
    out.dq = [curve](double x) { return curve->deriv(x); };
    out.d2q = [curve](double x) { return curve->second(x); };
    return out;
}

std::string describe_hypothesis_failure(const HypothesisReport& rep) {
    std::string what;
    if (!rep.h4_ok) what += "H4 (q admissibility) fails; ";
    if (!rep.h5_convex_ok) what += "H5 convexity of q fails; ";
    if (!rep.h5_concave_ok) what += "H5 concavity of q/q' fails; ";
    if (!rep.h3_ok) what += "H3 convexity of chi fails; ";
    for (const auto& w : rep.witnesses)
        what += "[witness: " + w.check + " at s=" + std::to_string(w.where) + "] ";
    return what;
}

}  // namespace

ModelSpec Scenario::model() const { return make_model(n, D, q, chi); }

Mesh1D Scenario::mesh() const { return build_mesh(L, N); }

StateField Scenario::initial_state() const {
    const Mesh1D m = mesh();
    StateField u(m.N, n);
    for (int i = 0; i < n; ++i) {
        const InitialSpec& s = ic[i];
        for (int k = 0; k < m.N; ++k) {
            switch (s.kind) {
                case InitialSpec::Kind::constant: u.at(k, i) = s.a; break;
                case InitialSpec::Kind::cosine:
                    u.at(k, i) = s.a + s.b * std::cos(s.k * M_PI * m.x(k) / m.L);
                    break;
                case InitialSpec::Kind::table: u.at(k, i) = s.table[k]; break;
            }
        }
    }
    return u;
}

StepperSettings Scenario::stepper() const {
    StepperSettings set;
    set.tau = tau;
    set.tau_min = tau_min;
    set.tau_max = tau_max;
    set.newton_tol = newton_tol;
    set.newton_max_iter = newton_max_iter;
    set.mobility_mean = mobility_mean;
    set.entropy_guard = entropy_guard;
    return set;
}

Scenario parse_scenario(const std::string& text) {
    std::map<std::string, RawEntry> entries;
    {
        std::istringstream is(text);
        std::string raw;
        int lineno = 0;
        while (std::getline(is, raw)) {
            ++lineno;
            const auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            const std::string line = trim(raw);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError(lineno, "expected `key = value`");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ParseError(lineno, "empty key");
            if (entries.count(key)) throw ParseError(lineno, "duplicate key '" + key + "'");
            entries[key] = RawEntry{value, lineno, false};
        }
    }

    auto take = [&entries](const std::string& key) -> RawEntry* {
        auto it = entries.find(key);
        if (it == entries.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    };
    auto require = [&take](const std::string& key) -> RawEntry& {
        RawEntry* e = take(key);
        if (!e) throw ParseError(0, "missing required key '" + key + "'");
        return *e;
    };

    Scenario sc;
    if (RawEntry* e = take("name")) sc.name = e->value;
    sc.L = parse_double(require("L"), "L");
    sc.N = parse_int(require("N"), "N");
    sc.n = parse_int(require("n"), "n");
    if (sc.n < 1) throw ValidationError("n must be >= 1");
    if (sc.N < 2) throw ValidationError("N must be >= 2 (H1: nondegenerate domain)");
    if (!(sc.L > 0.0)) throw ValidationError("L must be positive (H1)");

    sc.D.resize(sc.n);
    for (int i = 0; i < sc.n; ++i) {
        const std::string key = "D." + std::to_string(i + 1);
        sc.D[i] = parse_double(require(key), key);
        if (!(sc.D[i] > 0.0)) throw ValidationError(key + " must be positive");
    }

    {
        RawEntry& e = require("q");
        const std::vector<std::string> tok = split_ws(e.value);
        if (tok.size() == 2 && tok[0] == "power") {
            sc.q_alpha = parse_double(RawEntry{tok[1], e.line}, "q power");
            sc.q = PowerQ{sc.q_alpha};
        } else if (tok.size() == 2 && tok[0] == "custom") {
            sc.q = custom_q_from_table(tok[1], e.line);
        } else {
            throw ParseError(e.line, "q: expected `power <alpha>` or `custom <table file>`");
        }
    }

    if (RawEntry* e = take("chi")) {
        const std::vector<std::string> tok = split_ws(e->value);
        if (tok.size() == 1 && tok[0] == "zero") {
            sc.chi = ZeroChi{};
        } else if (tok.size() == static_cast<std::size_t>(sc.n) + 1 && tok[0] == "linear") {
            LinearChi lc;
            for (int i = 0; i < sc.n; ++i)
                lc.c.push_back(parse_double(RawEntry{tok[i + 1], e->line}, "chi linear"));
            sc.chi = std::move(lc);
        } else if (tok.size() == static_cast<std::size_t>(sc.n) + 1 && tok[0] == "quadratic") {
            SeparableChi qc;
            for (int i = 0; i < sc.n; ++i) {
                const double a = parse_double(RawEntry{tok[i + 1], e->line}, "chi quadratic");
                qc.parts.push_back({[a](double s) { return 0.5 * a * s * s; },
                                    [a](double s) { return a * s; },
                                    [a](double) { return a; }});
            }
            sc.chi = std::move(qc);
        } else {
            throw ParseError(e->line,
                             "chi: expected `zero`, `linear c_1..c_n`, or `quadratic a_1..a_n`");
        }
    }

    sc.ic.resize(sc.n);
    for (int i = 0; i < sc.n; ++i) {
        const std::string key = "ic." + std::to_string(i + 1);
        RawEntry& e = require(key);
        const std::vector<std::string> tok = split_ws(e.value);
        InitialSpec& isp = sc.ic[i];
        if (tok.size() == 2 && tok[0] == "constant") {
            isp.kind = InitialSpec::Kind::constant;
            isp.a = parse_double(RawEntry{tok[1], e.line}, key);
        } else if (tok.size() == 4 && tok[0] == "cosine") {
            isp.kind = InitialSpec::Kind::cosine;
            isp.a = parse_double(RawEntry{tok[1], e.line}, key);
            isp.b = parse_double(RawEntry{tok[2], e.line}, key);
            isp.k = parse_int(RawEntry{tok[3], e.line}, key);
        } else if (tok.size() == 2 && tok[0] == "table") {
            isp.kind = InitialSpec::Kind::table;
            isp.table = read_table_file(tok[1], e.line);
            if (static_cast<int>(isp.table.size()) != sc.N)
                throw ParseError(e.line, key + ": table must hold exactly N values");
        } else {
            throw ParseError(e.line, key + ": expected `constant c`, `cosine a b k`, or `table <file>`");
        }
    }

    sc.tau = parse_double(require("tau"), "tau");
    if (!(sc.tau > 0.0)) throw ValidationError("tau must be positive");
    sc.T = parse_double(require("T"), "T");
    if (!(sc.T > 0.0)) throw ValidationError("T must be positive");
    sc.tau_min = take("tau_min") ? parse_double(entries["tau_min"], "tau_min") : sc.tau * 1e-6;
    sc.tau_max = take("tau_max") ? parse_double(entries["tau_max"], "tau_max") : sc.tau;
    if (!(sc.tau_min > 0.0 && sc.tau_min <= sc.tau && sc.tau <= sc.tau_max))
        throw ValidationError("need 0 < tau_min <= tau <= tau_max");

    if (RawEntry* e = take("entropy_guard")) sc.entropy_guard = parse_bool(*e, "entropy_guard");
    if (RawEntry* e = take("newton_tol")) {
        sc.newton_tol = parse_double(*e, "newton_tol");
        if (!(sc.newton_tol > 0.0)) throw ValidationError("newton_tol must be positive");
    }
    if (RawEntry* e = take("newton_max_iter")) sc.newton_max_iter = parse_int(*e, "newton_max_iter");
    if (RawEntry* e = take("mobility_mean")) {
        try {
            sc.mobility_mean = parse_mobility_mean(e->value);
        } catch (const std::invalid_argument& ex) {
            throw ParseError(e->line, ex.what());
        }
    }
    if (RawEntry* e = take("seed")) sc.seed = static_cast<std::uint64_t>(parse_double(*e, "seed"));
    if (RawEntry* e = take("out")) sc.out_dir = e->value;

    const RawEntry* cadter = take("output.every_time");
    const RawEntry* cadstep = take("output.every_steps");
    if (cadter && cadstep) throw ParseError(cadstep->line, "choose one output cadence, not both");
    if (cadter) {
        sc.output_every_time = parse_double(*cadter, "output.every_time");
        if (!(sc.output_every_time > 0.0)) throw ValidationError("output.every_time must be positive");
    } else if (cadstep) {
        sc.output_every_steps = parse_int(*cadstep, "output.every_steps");
        if (sc.output_every_steps < 1) throw ValidationError("output.every_steps must be >= 1");
    } else {
        sc.output_every_time = sc.T / 500.0;  // documented default cadence
    }

    if (RawEntry* e = take("snapshots")) {
        for (const std::string& tok : split_ws(e->value)) {
            const double ts = parse_double(RawEntry{tok, e->line}, "snapshots");
            if (ts < 0.0 || ts > sc.T) throw ValidationError("snapshot times must lie in [0, T]");
            sc.snapshot_times.push_back(ts);
        }
        std::sort(sc.snapshot_times.begin(), sc.snapshot_times.end());
        sc.snapshot_times.erase(std::unique(sc.snapshot_times.begin(), sc.snapshot_times.end()),
                                sc.snapshot_times.end());
    } else {
        sc.snapshot_times = {0.0, sc.T};
    }

    for (const auto& [key, entry] : entries)
        if (!entry.used) throw ParseError(entry.line, "unknown key '" + key + "'");

    // hypothesis gate
    const ModelSpec model = sc.model();
    const HypothesisReport rep = hypothesis_report(model, 64);
    if (!rep.ok())
        throw ValidationError("scenario refused: " + describe_hypothesis_failure(rep), rep);

    // discretized initial data must lie in the closed simplex (H2)
    const StateField u0 = sc.initial_state();
    for (int k = 0; k < sc.N; ++k) {
        double sum = 0.0;
        for (int i = 0; i < sc.n; ++i) {
            if (u0.at(k, i) < 0.0 || u0.at(k, i) > 1.0)
                throw ValidationError("initial data outside [0,1] at cell " + std::to_string(k) +
                                      " (H2)");
            sum += u0.at(k, i);
        }
        if (sum > 1.0 + 1e-12)
            throw ValidationError("initial fractions sum above 1 at cell " + std::to_string(k) +
                                  " (H2: data must lie in the simplex)");
    }

    // relative-entropy diagnostics need an interior steady state
    const SimplexPoint uinf = steady_state(u0);
    if (!in_open_simplex(uinf.u, 1e-12))
        throw ValidationError(
            "steady state lies on the simplex boundary; relative-entropy diagnostics are undefined");

    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << is.rdbuf();
    Scenario sc = parse_scenario(buf.str());
    if (sc.name.empty()) {
        std::string stem = path;
        const auto slash = stem.find_last_of("/\\");
        if (slash != std::string::npos) stem.erase(0, slash + 1);
        const auto dot = stem.find_last_of('.');
        if (dot != std::string::npos) stem.erase(dot);
        sc.name = stem;
    }
    return sc;
}

}  // namespace volfill
