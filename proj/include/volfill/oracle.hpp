#ifndef VOLFILL_ORACLE_HPP
#define VOLFILL_ORACLE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "volfill/mesh.hpp"
#include "volfill/model.hpp"

namespace volfill {

struct CheckResult {
    std::string name;
    double max_dev = 0.0;
    double threshold = 0.0;
    bool pass = false;
    int samples = 0;
    std::uint64_t seed = 0;
    bool informational = false;  // reported, never gates
};

struct VerificationReport {
    std::vector<CheckResult> checks;

    bool all_pass() const;
};

void print_report(std::ostream& os, const VerificationReport& rep);

/// Forward Euler on the primal form: face-averaged diffusion matrix applied to
/// face gradients of u. Independent of the entropy-variable flux assembly.
StateField explicit_step(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u,
                         double tau);

/// ||A(u) g - M(u) o grad-log-potential(g)||_inf / ||A(u) g||_inf for the given matrix.
double flux_identity_deviation(const ModelSpec& spec, const SimplexPoint& u,
                               const std::vector<double>& g, const std::vector<double>& A);

CheckResult flux_identity_check(const ModelSpec& spec, int samples, std::uint64_t seed);

/// Centered-difference validation of the frozen-mobility Jacobian on a small mesh.
/// Emits the retained-block check, the tau=0 check, and the (informational)
/// frozen-mobility truncation against the full-FD Jacobian.
std::vector<CheckResult> fd_jacobian_check(const ModelSpec& spec, const Mesh1D& mesh,
                                           const StateField& u_old, double tau,
                                           std::uint64_t seed);

/// Closed-form vs adaptive-Simpson agreement of the h2 part and f2 for power q.
CheckResult quadrature_crosscheck(const ModelSpec& spec, int samples, std::uint64_t seed);

/// The standard suite behind `verify`.
VerificationReport run_all_checks(std::uint64_t seed);

}  // namespace volfill

#endif
