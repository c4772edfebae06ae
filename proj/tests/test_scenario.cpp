#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "volfill/scenario.hpp"

using namespace volfill;

namespace {

const char* kS1Text = R"(# reference scenario
name = S1
L = 1.0
N = 100
n = 2
D.1 = 1.0
D.2 = 0.5
q = power 2
chi = zero
ic.1 = cosine 0.3 0.2 1
ic.2 = cosine 0.3 -0.1 1
tau = 1e-3
T = 50
entropy_guard = on
)";

std::string temp_file(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream os(path);
    os << body;
    return path.string();
}

}  // namespace

TEST_CASE("a valid scenario parses with documented defaults") {
    const Scenario sc = parse_scenario(kS1Text);
    CHECK(sc.name == "S1");
    CHECK(sc.N == 100);
    CHECK(sc.n == 2);
    CHECK(sc.D[0] == 1.0);
    CHECK(sc.D[1] == 0.5);
    CHECK(sc.q_alpha == 2.0);
    CHECK(sc.tau == doctest::Approx(1e-3));
    CHECK(sc.T == 50.0);
    CHECK(sc.entropy_guard);
    // defaults
    CHECK(sc.tau_max == doctest::Approx(1e-3));
    CHECK(sc.tau_min == doctest::Approx(1e-9));
    CHECK(sc.newton_tol == doctest::Approx(1e-10));
    CHECK(sc.output_every_time == doctest::Approx(0.1));
    CHECK(sc.snapshot_times == std::vector<double>{0.0, 50.0});
    CHECK(sc.mobility_mean == MobilityMean::arithmetic);

    const StateField u0 = sc.initial_state();
    CHECK(u0.at(0, 0) == doctest::Approx(0.3 + 0.2 * std::cos(M_PI * 0.005)));
    CHECK(u0.at(0, 1) == doctest::Approx(0.3 - 0.1 * std::cos(M_PI * 0.005)));
}

TEST_CASE("alpha below one is refused citing the convexity hypothesis") {
    std::string text = kS1Text;
    text.replace(text.find("power 2"), 7, "power 0.5");
    try {
        parse_scenario(text);
        FAIL("expected refusal");
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        CHECK(what.find("H5") != std::string::npos);
        CHECK_FALSE(e.report.witnesses.empty());
        CHECK_FALSE(e.report.h5_convex_ok);
    }
}

TEST_CASE("initial fractions summing above one are refused") {
    std::string text = kS1Text;
    text.replace(text.find("cosine 0.3 0.2 1"), 16, "constant 0.70000");
    text.replace(text.find("cosine 0.3 -0.1 1"), 17, "constant 0.500000");
    CHECK_THROWS_AS(parse_scenario(text), ValidationError);
}

TEST_CASE("strict parsing: unknown keys, duplicates, malformed lines") {
    try {
        parse_scenario(std::string(kS1Text) + "mystery = 1\n");
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 15);  // appended after the 14-line scenario text
        CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_scenario(std::string(kS1Text) + "tau = 2e-3\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("L 1.0\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario(std::string(kS1Text) +
                                   "output.every_time = 0.1\noutput.every_steps = 5\n"),
                    ParseError);
}

TEST_CASE("missing required keys are reported") {
    CHECK_THROWS_AS(parse_scenario("L = 1.0\nN = 10\n"), ParseError);
}

TEST_CASE("boundary steady states are refused") {
    // masses sum to exactly 1, so u0_inf = 0
    const char* text = R"(
L = 1.0
N = 16
n = 2
D.1 = 1.0
D.2 = 1.0
q = power 2
ic.1 = constant 0.5
ic.2 = constant 0.5
tau = 1e-3
T = 1
)";
    CHECK_THROWS_AS(parse_scenario(text), ValidationError);
}

TEST_CASE("table initial conditions are read and size-checked") {
    std::string table;
    for (int k = 0; k < 8; ++k) table += "0.25\n";
    const std::string path = temp_file("volfill_ic_table.txt", table);

    std::string text = R"(
L = 1.0
N = 8
n = 1
D.1 = 1.0
q = power 1
ic.1 = table )" + path + "\ntau = 1e-3\nT = 1\n";
    const Scenario sc = parse_scenario(text);
    const StateField u0 = sc.initial_state();
    for (int k = 0; k < 8; ++k) CHECK(u0.at(k, 0) == 0.25);

    std::string bad = text;
    bad.replace(bad.find("N = 8"), 5, "N = 9");
    CHECK_THROWS_AS(parse_scenario(bad), ParseError);
}

TEST_CASE("custom q tables go through the hypothesis gate") {
    char row[80];
    // q(s) = s^2 sampled on a fine grid: admissible
    std::string good;
    for (int i = 0; i <= 64; ++i) {
        const double s = i / 64.0;
        std::snprintf(row, sizeof(row), "%.17g %.17g\n", s, s * s);
        good += row;
    }
    const std::string good_path = temp_file("volfill_q_good.txt", good);
    std::string text = R"(
L = 1.0
N = 16
n = 1
D.1 = 1.0
q = custom )" + good_path + R"(
ic.1 = cosine 0.4 0.1 1
tau = 1e-3
T = 1
)";
    const Scenario sc = parse_scenario(text);
    CHECK(std::holds_alternative<CustomQ>(sc.q));

    // sqrt-shaped table: concave, must be refused
    std::string bad;
    for (int i = 0; i <= 64; ++i) {
        const double s = i / 64.0;
        std::snprintf(row, sizeof(row), "%.17g %.17g\n", s, std::sqrt(s));
        bad += row;
    }
    const std::string bad_path = temp_file("volfill_q_bad.txt", bad);
    std::string bad_text = text;
    bad_text.replace(bad_text.find(good_path), good_path.size(), bad_path);
    CHECK_THROWS_AS(parse_scenario(bad_text), ValidationError);
}

TEST_CASE("chi families parse and p reflects them") {
    std::string text = kS1Text;
    text.replace(text.find("chi = zero"), 10, "chi = linear 0.5 -0.25");
    const Scenario sc = parse_scenario(text);
    const ModelSpec m = sc.model();
    SimplexPoint u;
    u.u = {0.3, 0.2};
    const PEval pe = p_eval(m, u);
    CHECK(pe.p[0] == doctest::Approx(std::exp(0.5)));
    CHECK(pe.p[1] == doctest::Approx(std::exp(-0.25)));

    std::string quad = kS1Text;
    quad.replace(quad.find("chi = zero"), 10, "chi = quadratic 1.0 2.0");
    const Scenario sq = parse_scenario(quad);
    const PEval pq = p_eval(sq.model(), u);
    CHECK(pq.p[0] == doctest::Approx(std::exp(0.3)));
    CHECK(pq.p[1] == doctest::Approx(std::exp(0.4)));
}
