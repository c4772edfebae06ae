#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "volfill/mesh.hpp"

using namespace volfill;

TEST_CASE("build_mesh geometry") {
    const Mesh1D m = build_mesh(1.0, 4);
    CHECK(m.dx == doctest::Approx(0.25));
    CHECK(m.x(0) == doctest::Approx(0.125));
    CHECK(m.x(3) == doctest::Approx(0.875));
    CHECK(build_mesh(2.0, 2).dx == doctest::Approx(1.0));
    CHECK(build_mesh(1.0, 100).dx == doctest::Approx(0.01));
    CHECK_THROWS_AS(build_mesh(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(1.0, 1), std::invalid_argument);
}

TEST_CASE("integrate: constants, affine exactness, zero") {
    const Mesh1D m = build_mesh(1.0, 1000);
    CellField ones(m.N, 1, 1.0);
    CHECK(integrate(m, ones) == doctest::Approx(1.0).epsilon(1e-14));

    CellField lin(m.N, 1);
    for (int k = 0; k < m.N; ++k) lin.at(k) = m.x(k);
    CHECK(integrate(m, lin) == doctest::Approx(0.5).epsilon(1e-6));

    CellField zero(m.N, 1, 0.0);
    CHECK(integrate(m, zero) == 0.0);
}

TEST_CASE("face_gradient: constants, affine, and second-order accuracy") {
    const Mesh1D m = build_mesh(1.0, 256);
    CellField c(m.N, 1, 3.7);
    const FaceField gc = face_gradient(m, c);
    for (double g : gc.data()) CHECK(g == 0.0);

    CellField lin(m.N, 1);
    for (int k = 0; k < m.N; ++k) lin.at(k) = m.x(k);
    const FaceField gl = face_gradient(m, lin);
    for (double g : gl.data()) CHECK(g == doctest::Approx(1.0).epsilon(1e-12));

    CellField s(m.N, 1);
    for (int k = 0; k < m.N; ++k) s.at(k) = std::sin(M_PI * m.x(k));
    const FaceField g = face_gradient(m, s);
    double err = 0.0;
    for (int f = 0; f + 1 < m.N; ++f) {
        const double xf = (f + 1) * m.dx;
        err = std::max(err, std::abs(g.at(f) - M_PI * std::cos(M_PI * xf)));
    }
    CHECK(err <= 1e-3);
}

TEST_CASE("divergence telescopes and matches the hand stencil") {
    const Mesh1D m = build_mesh(1.0, 3);
    FaceField ones(m.N - 1, 1.0);
    const CellField d = divergence(m, ones);
    CHECK(d.at(0) == doctest::Approx(1.0 / m.dx));
    CHECK(d.at(1) == doctest::Approx(0.0));
    CHECK(d.at(2) == doctest::Approx(-1.0 / m.dx));

    std::mt19937_64 rng(3);
    const Mesh1D m2 = build_mesh(2.0, 64);
    FaceField F(m2.N - 1);
    double scale = 0.0;
    for (int f = 0; f < F.faces(); ++f) {
        F.at(f) = 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0;
        scale = std::max(scale, std::abs(F.at(f)));
    }
    CHECK(std::abs(integrate(m2, divergence(m2, F))) <= 1e-14 * scale);
}

TEST_CASE("sqrt_grad_energy basics") {
    const Mesh1D m = build_mesh(1.0, 16);
    CellField c(m.N, 1, 0.42);
    CHECK(sqrt_grad_energy(m, c) == 0.0);

    const Mesh1D m2 = build_mesh(1.0, 2);
    CellField v(2, 1);
    v.at(0) = 0.0;
    v.at(1) = 1.0;
    CHECK(sqrt_grad_energy(m2, v) == doctest::Approx(2.0).epsilon(1e-14));

    // v = x^2 so sqrt v = x and the energy tends to 1
    const Mesh1D m3 = build_mesh(1.0, 512);
    CellField sq(m3.N, 1);
    for (int k = 0; k < m3.N; ++k) sq.at(k) = m3.x(k) * m3.x(k);
    CHECK(sqrt_grad_energy(m3, sq) == doctest::Approx(1.0).epsilon(2e-2));

    CellField neg(m.N, 1, -1.0);
    CHECK_THROWS_AS(sqrt_grad_energy(m, neg), std::domain_error);
}

TEST_CASE("summation by parts with no-flux closure") {
    const Mesh1D m = build_mesh(1.5, 48);
    std::mt19937_64 rng(9);
    auto u01 = [&] { return double(rng() >> 11) * 0x1.0p-53; };
    CellField g(m.N, 1);
    FaceField F(m.N - 1);
    for (int k = 0; k < m.N; ++k) g.at(k) = u01();
    for (int f = 0; f < F.faces(); ++f) F.at(f) = 2.0 * u01() - 1.0;

    const CellField div = divergence(m, F);
    double lhs = 0.0;
    for (int k = 0; k < m.N; ++k) lhs += g.at(k) * div.at(k);
    lhs *= m.dx;
    const FaceField dg = face_gradient(m, g);
    double rhs = 0.0;
    for (int f = 0; f < F.faces(); ++f) rhs -= F.at(f) * dg.at(f);
    rhs *= m.dx;
    CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("snapshot CSV format") {
    const Mesh1D m = build_mesh(1.0, 2);
    StateField u(2, 2);
    u.at(0, 0) = 0.25;
    u.at(0, 1) = 0.5;
    u.at(1, 0) = 0.125;
    u.at(1, 1) = 0.25;
    std::ostringstream os;
    write_snapshot_csv(os, m, u);
    CHECK(os.str() ==
          "x,u1,u2,u0\n"
          "0.25,0.25,0.5,0.25\n"
          "0.75,0.125,0.25,0.625\n");
}
