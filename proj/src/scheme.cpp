#include "volfill/scheme.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace volfill {

MobilityMean parse_mobility_mean(const std::string& name) {
    if (name == "arithmetic") return MobilityMean::arithmetic;
    if (name == "geometric") return MobilityMean::geometric;
    if (name == "upwind-max") return MobilityMean::upwind_max;
    throw std::invalid_argument("unknown mobility mean: " + name);
}

double face_mobility(MobilityMean mean, double mL, double mR) {
    if (mL < 0.0 || mR < 0.0) throw std::domain_error("face_mobility: negative cell mobility");
    switch (mean) {
        case MobilityMean::arithmetic: return 0.5 * (mL + mR);
        case MobilityMean::geometric: return std::sqrt(mL * mR);
        case MobilityMean::upwind_max: return std::max(mL, mR);
    }
    return 0.0;
}

namespace {

void cell_mobilities(const ModelSpec& spec, const StateField& u, std::vector<double>& out) {
    const int n = spec.n;
    const int N = u.cells();
    out.resize(static_cast<std::size_t>(N) * n);
    for (int k = 0; k < N; ++k)
        mobility_into(spec, u.row(k), out.data() + static_cast<std::size_t>(k) * n);
}

void face_mobilities_from_cells(const std::vector<double>& cellM, int N, int n, MobilityMean mean,
                                FaceMobilities& fm) {
    fm.faces = N - 1;
    fm.n = n;
    fm.v.resize(static_cast<std::size_t>(N - 1) * n);
    for (int f = 0; f + 1 < N; ++f)
        for (int i = 0; i < n; ++i)
            fm.at(f, i) = face_mobility(mean, cellM[static_cast<std::size_t>(f) * n + i],
                                        cellM[static_cast<std::size_t>(f + 1) * n + i]);
}

// u(w) cellwise, residual, and (unless frozen) the face mobilities of u(w).
void compute_residual_core(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u_old,
                           const CellField& w, double tau, const ResidualOptions& opts,
                           const StateField* hint, StateField& u_of_w, FaceMobilities& fm,
                           CellField& R, std::vector<double>& cellM_scratch) {
    const int n = spec.n;
    const int N = mesh.N;
    if (w.cells() != N || w.comps() != n) throw std::invalid_argument("assemble_residual: w size mismatch");
    if (u_old.cells() != N || u_old.comps() != n)
        throw std::invalid_argument("assemble_residual: state size mismatch");

    if (u_of_w.cells() != N || u_of_w.comps() != n) u_of_w = StateField(N, n);
    InverseMapOptions iopt;
    iopt.tol = opts.inner_tol;
    for (int k = 0; k < N; ++k)
        invert_entropy_gradient(spec, w.row(k), u_of_w.row(k), hint ? hint->row(k) : nullptr, iopt);

    if (opts.frozen_mobility) {
        fm = *opts.frozen_mobility;
    } else {
        cell_mobilities(spec, u_of_w, cellM_scratch);
        face_mobilities_from_cells(cellM_scratch, N, n, opts.mean, fm);
    }

    if (R.cells() != N || R.comps() != n) R = CellField(N, n);
    const double lam = tau / (mesh.dx * mesh.dx);
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < n; ++i) {
            double flux = 0.0;
            if (k + 1 < N) flux += fm.at(k, i) * (w.at(k + 1, i) - w.at(k, i));
            if (k > 0) flux -= fm.at(k - 1, i) * (w.at(k, i) - w.at(k - 1, i));
            R.at(k, i) = u_of_w.at(k, i) - u_old.at(k, i) - lam * flux;
        }
    }
}

double max_abs(const CellField& f) {
    double m = 0.0;
    for (double v : f.data()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

FaceMobilities cell_to_face_mobilities(const ModelSpec& spec, const Mesh1D& mesh,
                                       const StateField& u, MobilityMean mean) {
    std::vector<double> cellM;
    cell_mobilities(spec, u, cellM);
    FaceMobilities fm;
    face_mobilities_from_cells(cellM, mesh.N, spec.n, mean, fm);
    return fm;
}

CellField assemble_residual(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u_old,
                            const CellField& w_new, double tau, const ResidualOptions& opts) {
    StateField u_of_w;
    FaceMobilities fm;
    CellField R;
    std::vector<double> scratch;
    compute_residual_core(spec, mesh, u_old, w_new, tau, opts, nullptr, u_of_w, fm, R, scratch);
    return R;
}

std::vector<double> assemble_jacobian_dense(const ModelSpec& spec, const Mesh1D& mesh,
                                            const CellField& w, double tau, MobilityMean mean,
                                            double inner_tol) {
    const int n = spec.n;
    const int N = mesh.N;
    const int dim = N * n;
    std::vector<double> J(static_cast<std::size_t>(dim) * dim, 0.0);

    StateField u_of_w(N, n);
    InverseMapOptions iopt;
    iopt.tol = inner_tol;
    for (int k = 0; k < N; ++k)
        invert_entropy_gradient(spec, w.row(k), u_of_w.row(k), nullptr, iopt);
    std::vector<double> cellM;
    cell_mobilities(spec, u_of_w, cellM);
    FaceMobilities fm;
    face_mobilities_from_cells(cellM, N, n, mean, fm);

    const double lam = tau / (mesh.dx * mesh.dx);
    SimplexPoint pt;
    pt.u.resize(n);
    std::vector<double> hinv(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < N; ++k) {
        std::copy(u_of_w.row(k), u_of_w.row(k) + n, pt.u.begin());
        entropy_hessian(spec, pt).inverse_dense(hinv.data());
        for (int i = 0; i < n; ++i) {
            const int row = k * n + i;
            for (int j = 0; j < n; ++j) J[static_cast<std::size_t>(row) * dim + k * n + j] = hinv[static_cast<std::size_t>(i) * n + j];
            if (k + 1 < N) {
                J[static_cast<std::size_t>(row) * dim + row] += lam * fm.at(k, i);
                J[static_cast<std::size_t>(row) * dim + (k + 1) * n + i] -= lam * fm.at(k, i);
            }
            if (k > 0) {
                J[static_cast<std::size_t>(row) * dim + row] += lam * fm.at(k - 1, i);
                J[static_cast<std::size_t>(row) * dim + (k - 1) * n + i] -= lam * fm.at(k - 1, i);
            }
        }
    }
    return J;
}

void nudge_into_interior(StateField& u, double margin) {
    const int n = u.comps();
    for (int k = 0; k < u.cells(); ++k) {
        double* row = u.row(k);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += row[i];
        if (sum > 1.0 - margin) {
            const double scale = (1.0 - margin) / sum;
            for (int i = 0; i < n; ++i) row[i] *= scale;
        }
        for (int i = 0; i < n; ++i) row[i] = std::max(row[i], margin);
        sum = 0.0;
        for (int i = 0; i < n; ++i) sum += row[i];
        if (sum > 1.0 - margin) {
            const double scale = (1.0 - margin) / sum;
            for (int i = 0; i < n; ++i) row[i] *= scale;
        }
    }
}

// ---------------------------------------------------------------------------
// EntropyStepper
// ---------------------------------------------------------------------------

struct EntropyStepper::Impl {
    ModelSpec spec;
    Mesh1D mesh;
    StepperSettings set;
    int n, N;

    CellField w, w_try, delta, R, R_try;
    StateField u_cur, u_try;
    FaceMobilities fm, fm_try;
    std::vector<double> cellM;

    std::vector<Eigen::MatrixXd> Lmat;
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> lus;
    std::vector<Eigen::VectorXd> yvec;
    Eigen::MatrixXd Uk, Uinv, Bk, Ident;
    Eigen::VectorXd rhs, xk;
    std::vector<double> hdiag;

    Impl(const ModelSpec& s, const Mesh1D& m, const StepperSettings& st)
        : spec(s), mesh(m), set(st), n(s.n), N(m.N),
          w(N, n), w_try(N, n), delta(N, n), R(N, n), R_try(N, n), u_cur(N, n), u_try(N, n),
          Lmat(N), lus(N), yvec(N), Uk(n, n), Uinv(n, n), Bk(n, n),
          Ident(Eigen::MatrixXd::Identity(n, n)), rhs(n), xk(n), hdiag(n) {
        for (int k = 0; k < N; ++k) {
            Lmat[k].resize(n, n);
            yvec[k].resize(n);
        }
    }

    // Solve J dw = -R with J = blockdiag(Hinv) + tau * frozen-mobility stencil.
    void solve_linear(double tau) {
        const double lam = tau / (mesh.dx * mesh.dx);
        for (int k = 0; k < N; ++k) {
            double sigma = 0.0;
            entropy_hessian_into(spec, u_cur.row(k), hdiag.data(), &sigma);
            double zsum = 0.0;
            for (int i = 0; i < n; ++i) zsum += 1.0 / hdiag[i];
            const double denom = 1.0 + sigma * zsum;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double v = -sigma / (hdiag[i] * hdiag[j] * denom);
                    if (i == j) v += 1.0 / hdiag[i];
                    Bk(i, j) = v;
                }
            for (int i = 0; i < n; ++i) {
                if (k + 1 < N) Bk(i, i) += lam * fm.at(k, i);
                if (k > 0) Bk(i, i) += lam * fm.at(k - 1, i);
            }

            if (k == 0) {
                Uk = Bk;
            } else {
                // L_k = A_k U_{k-1}^{-1} with A_k = -lam diag(Fm_{k-1/2})
                Uinv.noalias() = lus[k - 1].solve(Ident);
                for (int i = 0; i < n; ++i) {
                    const double a = -lam * fm.at(k - 1, i);
                    for (int j = 0; j < n; ++j) Lmat[k](i, j) = a * Uinv(i, j);
                }
                // U_k = B_k - L_k C_{k-1}, C_{k-1} = -lam diag(Fm_{k-1/2})
                Uk = Bk;
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) Uk(i, j) -= Lmat[k](i, j) * (-lam * fm.at(k - 1, j));
            }
            lus[k].compute(Uk);

            for (int i = 0; i < n; ++i) rhs(i) = -R.at(k, i);
            if (k > 0) rhs -= Lmat[k] * yvec[k - 1];
            yvec[k] = rhs;
        }

        for (int k = N - 1; k >= 0; --k) {
            rhs = yvec[k];
            if (k + 1 < N)
                for (int i = 0; i < n; ++i) rhs(i) -= (-lam * fm.at(k, i)) * delta.at(k + 1, i);
            xk = lus[k].solve(rhs);
            for (int i = 0; i < n; ++i) {
                if (!std::isfinite(xk(i))) throw LinearSolveError("singular band matrix in Newton solve");
                delta.at(k, i) = xk(i);
            }
        }
    }
};

EntropyStepper::EntropyStepper(const ModelSpec& spec, const Mesh1D& mesh,
                               const StepperSettings& settings)
    : impl_(std::make_unique<Impl>(spec, mesh, settings)) {}

EntropyStepper::~EntropyStepper() = default;

const StepperSettings& EntropyStepper::settings() const { return impl_->set; }

EntropyStepper::Outcome EntropyStepper::attempt(const StateField& u_old, double tau,
                                                StepResult& out) {
    Impl& im = *impl_;
    const int n = im.n;
    const int N = im.N;

    out.stats = SolveStats{};
    out.tau_used = tau;
    out.entropy_old = total_entropy(im.spec, im.mesh, u_old);

    SimplexPoint pt;
    pt.u.resize(n);
    for (int k = 0; k < N; ++k) {
        std::copy(u_old.row(k), u_old.row(k) + n, pt.u.begin());
        const EntropyCoordinates wk = entropy_gradient(im.spec, pt);
        std::copy(wk.w.begin(), wk.w.end(), im.w.row(k));
    }
    im.u_cur = u_old;

    ResidualOptions opts;
    opts.mean = im.set.mobility_mean;

    bool converged = false;
    double rnorm = 0.0;
    for (int iter = 1; iter <= im.set.newton_max_iter; ++iter) {
        compute_residual_core(im.spec, im.mesh, u_old, im.w, tau, opts, &im.u_cur, im.u_cur, im.fm,
                              im.R, im.cellM);
        rnorm = max_abs(im.R);
        out.stats.final_residual_norm = rnorm;
        if (rnorm <= im.set.newton_tol) {
            out.stats.newton_iters = iter;
            converged = true;
            break;
        }
        if (iter == im.set.newton_max_iter) break;

        im.solve_linear(tau);
        out.stats.linear_solves += 1;

        // backtracking on the residual norm
        double theta = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 12; ++bt) {
            for (int k = 0; k < N; ++k)
                for (int i = 0; i < n; ++i)
                    im.w_try.at(k, i) = im.w.at(k, i) + theta * im.delta.at(k, i);
            try {
                compute_residual_core(im.spec, im.mesh, u_old, im.w_try, tau, opts, &im.u_cur,
                                      im.u_try, im.fm_try, im.R_try, im.cellM);
            } catch (const SolverError&) {
                theta *= 0.5;
                continue;
            }
            if (max_abs(im.R_try) < rnorm * (1.0 - 1e-4 * theta)) {
                im.w = im.w_try;
                im.u_cur = im.u_try;
                accepted = true;
                break;
            }
            theta *= 0.5;
        }
        if (!accepted) {
            out.stats.newton_iters = iter;
            return Outcome::newton_failure;
        }
    }
    if (!converged) return Outcome::newton_failure;

    // Conservative update: u_new = u(w) - R, so fluxes telescope and per-species
    // mass is exact to round-off; it matches u(w) within newton_tol.
    if (out.u_new.cells() != N || out.u_new.comps() != n) out.u_new = StateField(N, n);
    for (int k = 0; k < N; ++k)
        for (int i = 0; i < n; ++i) out.u_new.at(k, i) = im.u_cur.at(k, i) - im.R.at(k, i);

    for (int k = 0; k < N; ++k) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!(out.u_new.at(k, i) > 0.0)) return Outcome::box_violation;
            sum += out.u_new.at(k, i);
        }
        if (!(sum < 1.0)) return Outcome::box_violation;
    }

    out.w_new = im.w;
    out.entropy_new = total_entropy(im.spec, im.mesh, out.u_new);

    double diss = 0.0;
    for (int f = 0; f + 1 < N; ++f)
        for (int i = 0; i < n; ++i) {
            const double dw = (im.w.at(f + 1, i) - im.w.at(f, i)) / im.mesh.dx;
            diss += im.fm.at(f, i) * dw * dw;
        }
    out.dissipation = diss * im.mesh.dx;

    if (im.set.entropy_guard && out.entropy_new > out.entropy_old + 1e-10)
        return Outcome::entropy_violation;

    return Outcome::ok;
}

StepResult EntropyStepper::step(const StateField& u_old, double tau) {
    StepResult res;
    SolveStats agg;
    double cur = tau;
    while (true) {
        const Outcome oc = attempt(u_old, cur, res);
        agg.linear_solves += res.stats.linear_solves;
        agg.final_residual_norm = res.stats.final_residual_norm;
        if (oc == Outcome::ok) {
            res.stats.step_rejections = agg.step_rejections;
            res.stats.linear_solves = agg.linear_solves;
            return res;
        }
        agg.step_rejections += 1;
        if (cur <= impl_->set.tau_min * (1.0 + 1e-12)) {
            const char* why = oc == Outcome::newton_failure ? "Newton did not converge"
                              : oc == Outcome::box_violation ? "state left the simplex"
                                                             : "entropy guard violated";
            throw NonConvergenceError(std::string("newton_solve: ") + why + " at tau_min", agg);
        }
        cur = std::max(0.5 * cur, impl_->set.tau_min);
    }
}

StepResult newton_solve(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u_old,
                        double tau, const StepperSettings& settings) {
    EntropyStepper stepper(spec, mesh, settings);
    return stepper.step(u_old, tau);
}

}  // namespace volfill
