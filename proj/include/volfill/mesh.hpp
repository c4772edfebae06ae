#ifndef VOLFILL_MESH_HPP
#define VOLFILL_MESH_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace volfill {

/// Uniform 1D finite-volume mesh on (0, L) with no-flux boundaries.
struct Mesh1D {
    double L = 1.0;
    int N = 2;
    double dx = 0.5;

    double x(int k) const { return (k + 0.5) * dx; }
};

Mesh1D build_mesh(double L, int N);

/// N x m array of per-cell values, row per cell.
class CellField {
public:
    CellField() = default;
    CellField(int cells, int comps, double fill = 0.0)
        : cells_(cells), comps_(comps), v_(static_cast<std::size_t>(cells) * comps, fill) {}

    int cells() const { return cells_; }
    int comps() const { return comps_; }

    double& at(int k, int i = 0) { return v_[static_cast<std::size_t>(k) * comps_ + i]; }
    double at(int k, int i = 0) const { return v_[static_cast<std::size_t>(k) * comps_ + i]; }

    double* row(int k) { return v_.data() + static_cast<std::size_t>(k) * comps_; }
    const double* row(int k) const { return v_.data() + static_cast<std::size_t>(k) * comps_; }

    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

private:
    int cells_ = 0;
    int comps_ = 0;
    std::vector<double> v_;
};

/// A state field holds one simplex point per cell (comps = species count).
using StateField = CellField;

/// Scalar values at the N-1 interior faces; boundary fluxes are zero by construction.
class FaceField {
public:
    FaceField() = default;
    explicit FaceField(int faces, double fill = 0.0) : v_(faces, fill) {}

    int faces() const { return static_cast<int>(v_.size()); }
    double& at(int f) { return v_[f]; }
    double at(int f) const { return v_[f]; }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

private:
    std::vector<double> v_;
};

double integrate(const Mesh1D& mesh, const CellField& f, int comp = 0);
FaceField face_gradient(const Mesh1D& mesh, const CellField& f, int comp = 0);
CellField divergence(const Mesh1D& mesh, const FaceField& flux);
double sqrt_grad_energy(const Mesh1D& mesh, const CellField& v, int comp = 0);

/// Snapshot CSV: header `x,u1,...,un,u0`, one row per cell, 17 significant digits.
void write_snapshot_csv(std::ostream& os, const Mesh1D& mesh, const StateField& state);
void write_snapshot_csv(const std::string& path, const Mesh1D& mesh, const StateField& state);

/// printf("%.17g") formatting used by every CSV writer.
std::string format_full(double x);

}  // namespace volfill

#endif
