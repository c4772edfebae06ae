#ifndef VOLFILL_MODEL_HPP
#define VOLFILL_MODEL_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "volfill/mesh.hpp"

namespace volfill {

// ---------------------------------------------------------------------------
// Model families
// ---------------------------------------------------------------------------

/// q(s) = s^alpha. Admissible for alpha >= 1 (checked by hypothesis_report,
/// not the constructor, so that inadmissible exponents can be diagnosed).
struct PowerQ {
    double alpha = 1.0;
};

/// User-supplied evaluators for q, q', q'' on [0,1]. Values are normalized by
/// q(1) at ModelSpec construction so q(1) = 1 holds exactly.
struct CustomQ {
    std::function<double(double)> q;
    std::function<double(double)> dq;
    std::function<double(double)> d2q;
};

using QFamily = std::variant<PowerQ, CustomQ>;

struct ZeroChi {};

/// chi(u) = sum_i c_i u_i, hence p_i = exp(c_i) constant.
struct LinearChi {
    std::vector<double> c;
};

/// One convex scalar potential per species: chi(u) = sum_i chi_i(u_i),
/// p_i = exp(chi_i'(u_i)).
struct ScalarPotential {
    std::function<double(double)> chi;
    std::function<double(double)> dchi;
    std::function<double(double)> d2chi;
};

struct SeparableChi {
    std::vector<ScalarPotential> parts;
};

using ChiFamily = std::variant<ZeroChi, LinearChi, SeparableChi>;

/// The continuous model: species count, diffusivities, occupancy weight q and
/// occupancy potential chi. Immutable after construction; safe to share.
struct ModelSpec {
    int n = 1;
    std::vector<double> D;
    QFamily q{PowerQ{1.0}};
    ChiFamily chi{ZeroChi{}};

    bool is_power() const { return std::holds_alternative<PowerQ>(q); }
    double power_alpha() const { return std::get<PowerQ>(q).alpha; }
};

/// Validates sizes and positivity; normalizes custom q by q(1).
ModelSpec make_model(int n, std::vector<double> D, QFamily q, ChiFamily chi = ZeroChi{});

// ---------------------------------------------------------------------------
// State types
// ---------------------------------------------------------------------------

/// Volume fractions u_1..u_n with derived solvent fraction u0 = 1 - sum u_i.
struct SimplexPoint {
    std::vector<double> u;

    double u0() const;
    int n() const { return static_cast<int>(u.size()); }
};

bool in_closed_simplex(const std::vector<double>& u, double tol = 0.0);
bool in_open_simplex(const std::vector<double>& u, double margin = 0.0);

/// Entropy variables w_i = log(u_i p_i(u) / q(u0)).
struct EntropyCoordinates {
    std::vector<double> w;
};

// ---------------------------------------------------------------------------
// Pointwise model evaluations
// ---------------------------------------------------------------------------

struct QEval {
    double q;
    double dq;
    double d2q;  // +inf at s=0 for power exponents in (1,2); never used there
};

QEval q_eval(const ModelSpec& spec, double s);

struct PEval {
    double chi;
    std::vector<double> grad_chi;
    std::vector<double> p;
};

PEval p_eval(const ModelSpec& spec, const SimplexPoint& u);

/// dp_i/du_j, row-major n x n (zero except diagonal for the separable family).
std::vector<double> p_jacobian(const ModelSpec& spec, const SimplexPoint& u);

/// Row-major diffusion matrix A(u).
std::vector<double> diffusion_matrix(const ModelSpec& spec, const SimplexPoint& u);

/// Diagonal mobilities M_i = D_i u_i p_i(u) q(u0).
std::vector<double> mobility(const ModelSpec& spec, const SimplexPoint& u);

/// Allocation-free variants for per-cell hot loops.
void mobility_into(const ModelSpec& spec, const double* u, double* M_out);
void entropy_hessian_into(const ModelSpec& spec, const double* u, double* diag_out,
                          double* sigma_out);

double entropy_density(const ModelSpec& spec, const SimplexPoint& u);

/// Throws std::domain_error on the simplex boundary (components diverge).
EntropyCoordinates entropy_gradient(const ModelSpec& spec, const SimplexPoint& u);

/// Hessian of the entropy density at interior u: diag + sigma * ones ones^T.
struct EntropyHessian {
    std::vector<double> diag;
    double sigma = 0.0;

    void apply_inverse(const double* g, double* out) const;
    void inverse_dense(double* out_rowmajor) const;
};

EntropyHessian entropy_hessian(const ModelSpec& spec, const SimplexPoint& u);

// ---------------------------------------------------------------------------
// Inverse of the entropy gradient
// ---------------------------------------------------------------------------

struct InverseMapOptions {
    double tol = 1e-13;
    int max_iter = 200;
    double margin = 1e-14;  // iterates keep u_i and u0 above this
};

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what, std::vector<double> last = {})
        : std::runtime_error(what), last_iterate(std::move(last)) {}
    std::vector<double> last_iterate;
};

/// Damped Newton on w(u) = w_target starting from the barycenter u_i = 1/(2n).
SimplexPoint primal_from_entropy(const ModelSpec& spec, const EntropyCoordinates& w, double tol);

/// Allocation-free workhorse. `guess` may be null (barycenter start).
void invert_entropy_gradient(const ModelSpec& spec, const double* w, double* u_out,
                             const double* guess, const InverseMapOptions& opt);

// ---------------------------------------------------------------------------
// Steady state and relative entropy
// ---------------------------------------------------------------------------

/// Cell average of each species (the conserved steady state on a uniform mesh).
SimplexPoint steady_state(const StateField& initial);

/// Discrete entropy integral_Omega h(u) dx over a state field.
double total_entropy(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u);

struct RelativeEntropyParts {
    double h1;
    double h2;
    double h3;
    double total() const { return h1 + h2 + h3; }
};

/// Pointwise split of the relative entropy density about interior uinf.
RelativeEntropyParts relative_entropy_parts(const ModelSpec& spec, const SimplexPoint& u,
                                            const SimplexPoint& uinf);

/// integral_a^b log(q(s)/q(a)) ds: closed form for PowerQ, integration by
/// parts plus adaptive Simpson for CustomQ. Used by both the h2 part and f2.
double log_q_bregman(const ModelSpec& spec, double b, double a);

/// integral_1^{u0} log q(s) ds (the q-part of the entropy density).
double integral_log_q_from_one(const ModelSpec& spec, double u0);

// ---------------------------------------------------------------------------
// Hypothesis checking
// ---------------------------------------------------------------------------

struct HypothesisWitness {
    std::string check;
    double where = 0.0;
    double value = 0.0;
};

struct HypothesisReport {
    bool h3_ok = false;           // chi convex
    bool h4_ok = false;           // q(0)=0, q(1)=1, q>0 and q'>0 on (0,1]
    bool h5_convex_ok = false;    // q convex
    bool h5_concave_ok = false;   // q/q' concave
    std::optional<double> beta;   // populated only when the limit check passes
    std::optional<double> c1;
    std::vector<HypothesisWitness> witnesses;

    bool ok() const { return h3_ok && h4_ok && h5_convex_ok && h5_concave_ok; }
};

HypothesisReport hypothesis_report(const ModelSpec& spec, int grid_size);

}  // namespace volfill

#endif
