#ifndef VOLFILL_SCHEME_HPP
#define VOLFILL_SCHEME_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "volfill/mesh.hpp"
#include "volfill/model.hpp"

namespace volfill {

enum class MobilityMean { arithmetic, geometric, upwind_max };

MobilityMean parse_mobility_mean(const std::string& name);

struct StepperSettings {
    double tau = 1e-3;
    double tau_min = 1e-9;
    double tau_max = 1e-3;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    MobilityMean mobility_mean = MobilityMean::arithmetic;
    bool entropy_guard = true;  // reject steps that raise the discrete entropy beyond 1e-10
};

struct SolveStats {
    int newton_iters = 0;
    int linear_solves = 0;
    int step_rejections = 0;
    double final_residual_norm = 0.0;
};

double face_mobility(MobilityMean mean, double mL, double mR);

/// Per-species mobilities at the N-1 interior faces, row per face.
struct FaceMobilities {
    int faces = 0;
    int n = 0;
    std::vector<double> v;

    FaceMobilities() = default;
    FaceMobilities(int faces_, int n_) : faces(faces_), n(n_), v(static_cast<std::size_t>(faces_) * n_, 0.0) {}
    double& at(int f, int i) { return v[static_cast<std::size_t>(f) * n + i]; }
    double at(int f, int i) const { return v[static_cast<std::size_t>(f) * n + i]; }
};

FaceMobilities cell_to_face_mobilities(const ModelSpec& spec, const Mesh1D& mesh,
                                       const StateField& u, MobilityMean mean);

struct ResidualOptions {
    MobilityMean mean = MobilityMean::arithmetic;
    const FaceMobilities* frozen_mobility = nullptr;  // verification hook
    double inner_tol = 1e-13;
};

/// Implicit-Euler residual in entropy variables:
/// R_{k,i} = u(w)_{k,i} - u_old_{k,i} - (tau/dx^2) [Fm_R (w_{k+1,i}-w_{k,i}) - Fm_L (w_{k,i}-w_{k-1,i})].
CellField assemble_residual(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u_old,
                            const CellField& w_new, double tau,
                            const ResidualOptions& opts = {});

/// Dense frozen-mobility Jacobian of the residual (verification surface; small meshes).
std::vector<double> assemble_jacobian_dense(const ModelSpec& spec, const Mesh1D& mesh,
                                            const CellField& w, double tau,
                                            MobilityMean mean = MobilityMean::arithmetic,
                                            double inner_tol = 1e-13);

struct NonConvergenceError : std::runtime_error {
    NonConvergenceError(const std::string& what, SolveStats s)
        : std::runtime_error(what), stats(s) {}
    SolveStats stats;
};

struct LinearSolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StepResult {
    StateField u_new;
    CellField w_new;
    SolveStats stats;
    double tau_used = 0.0;
    double entropy_old = 0.0;
    double entropy_new = 0.0;
    double dissipation = 0.0;  // sum_faces sum_i Fm_i ((dw_i)/dx)^2 dx
};

/// One implicit Euler step. Retries with halved tau (down to tau_min) on Newton
/// failure, box violation, or entropy-guard violation; throws on final failure.
StepResult newton_solve(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u_old,
                        double tau, const StepperSettings& settings);

/// States exactly on the simplex boundary are moved inward by the margin
/// (and rescaled when the occupied fractions leave no room for u0).
void nudge_into_interior(StateField& u, double margin = 1e-12);

/// Reusable stepper: owns all Newton workspaces; one instance per simulation.
class EntropyStepper {
public:
    EntropyStepper(const ModelSpec& spec, const Mesh1D& mesh, const StepperSettings& settings);
    ~EntropyStepper();

    EntropyStepper(const EntropyStepper&) = delete;
    EntropyStepper& operator=(const EntropyStepper&) = delete;

    enum class Outcome { ok, newton_failure, box_violation, entropy_violation };

    /// Single attempt at the given tau (no retry). Result valid when ok.
    Outcome attempt(const StateField& u_old, double tau, StepResult& out);

    /// Retry loop with tau halving; throws NonConvergenceError at tau_min.
    StepResult step(const StateField& u_old, double tau);

    const StepperSettings& settings() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace volfill

#endif
