#include "volfill/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace volfill {

Mesh1D build_mesh(double L, int N) {
    if (!(L > 0.0)) throw std::invalid_argument("build_mesh: L must be positive");
    if (N < 2) throw std::invalid_argument("build_mesh: need at least 2 cells");
    Mesh1D m;
    m.L = L;
    m.N = N;
    m.dx = L / N;
    return m;
}

static void check_size(const Mesh1D& mesh, const CellField& f, int comp) {
    if (f.cells() != mesh.N) throw std::invalid_argument("cell field size mismatch");
    if (comp < 0 || comp >= f.comps()) throw std::invalid_argument("component out of range");
}

double integrate(const Mesh1D& mesh, const CellField& f, int comp) {
    check_size(mesh, f, comp);
    double sum = 0.0;
    for (int k = 0; k < mesh.N; ++k) sum += f.at(k, comp);
    return sum * mesh.dx;
}

FaceField face_gradient(const Mesh1D& mesh, const CellField& f, int comp) {
    check_size(mesh, f, comp);
    FaceField g(mesh.N - 1);
    for (int k = 0; k + 1 < mesh.N; ++k) g.at(k) = (f.at(k + 1, comp) - f.at(k, comp)) / mesh.dx;
    return g;
}

CellField divergence(const Mesh1D& mesh, const FaceField& flux) {
    if (flux.faces() != mesh.N - 1) throw std::invalid_argument("face field size mismatch");
    CellField d(mesh.N, 1);
    for (int k = 0; k < mesh.N; ++k) {
        const double right = (k < mesh.N - 1) ? flux.at(k) : 0.0;
        const double left = (k > 0) ? flux.at(k - 1) : 0.0;
        d.at(k) = (right - left) / mesh.dx;
    }
    return d;
}

double sqrt_grad_energy(const Mesh1D& mesh, const CellField& v, int comp) {
    check_size(mesh, v, comp);
    double sum = 0.0;
    for (int k = 0; k + 1 < mesh.N; ++k) {
        const double a = v.at(k, comp);
        const double b = v.at(k + 1, comp);
        if (a < 0.0 || b < 0.0) throw std::domain_error("sqrt_grad_energy: negative input");
        const double slope = (std::sqrt(b) - std::sqrt(a)) / mesh.dx;
        sum += slope * slope;
    }
    return sum * mesh.dx;
}

std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_snapshot_csv(std::ostream& os, const Mesh1D& mesh, const StateField& state) {
    check_size(mesh, state, 0);
    const int n = state.comps();
    os << "x";
    for (int i = 1; i <= n; ++i) os << ",u" << i;
    os << ",u0\n";
    for (int k = 0; k < mesh.N; ++k) {
        os << format_full(mesh.x(k));
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            os << ',' << format_full(state.at(k, i));
            sum += state.at(k, i);
        }
        os << ',' << format_full(1.0 - sum) << '\n';
    }
}

void write_snapshot_csv(const std::string& path, const Mesh1D& mesh, const StateField& state) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_snapshot_csv(os, mesh, state);
}

}  // namespace volfill
