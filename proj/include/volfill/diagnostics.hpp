#ifndef VOLFILL_DIAGNOSTICS_HPP
#define VOLFILL_DIAGNOSTICS_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "volfill/mesh.hpp"
#include "volfill/model.hpp"

namespace volfill {

/// One time-stamped row of every monitored functional.
struct DiagnosticsRecord {
    double t = 0.0;
    std::vector<double> mass;       // per-species integral of u_i
    double H = 0.0;                 // total entropy
    double Hstar = 0.0;             // relative entropy h1 + h2 + h3
    double h1 = 0.0, h2 = 0.0, h3 = 0.0;
    double EP_u = 0.0, EP_q = 0.0;  // entropy production pieces
    double f1_int = 0.0, f2_int = 0.0;
    double qbar = 0.0;
    std::vector<double> qbar_i;
    double keygap_sup = 0.0;        // sup |f1/qbar - h1*| over cells
    std::vector<double> lsi_ratio;  // per species; +inf flags a vanishing denominator
    double lsi_ratio_max = 0.0;
    double csi_ratio_f2 = 0.0;
    double ckp_margin = 0.0;        // min over cells of h1* - 0.5 sum (u_i - uinf_i)^2
    double sup_dev = 0.0;
    double c0_hat = 0.0;            // running min of entropy drop / production integral
    double hstar_direct = 0.0;      // one-shot Bregman evaluation, for the consistency check
    double tau = 0.0;
    int newton_iters = 0;
};

struct QbarResult {
    double qbar = 0.0;
    std::vector<double> qbar_i;
};

QbarResult qbar_and_qbar_i(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u);

struct FunctionalField {
    double integral = 0.0;
    CellField cellwise;
};

FunctionalField f1_total(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u,
                         const std::vector<double>& qbar_i);
FunctionalField f2_total(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u,
                         double qbar);

struct EntropyProduction {
    double EP_u = 0.0;
    double EP_q = 0.0;
};

EntropyProduction entropy_production(const ModelSpec& spec, const Mesh1D& mesh,
                                     const StateField& u);

double key_gap(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u,
               const SimplexPoint& uinf, double qbar);

struct InequalityMonitors {
    std::vector<double> lsi_ratio;
    double csi_ratio_f2 = 0.0;
    double ckp_margin = 0.0;
};

InequalityMonitors inequality_monitors(const ModelSpec& spec, const Mesh1D& mesh,
                                       const StateField& u, const SimplexPoint& uinf);

/// Builds full records along a run; keeps the trailing-window state for c0_hat.
class DiagnosticsAccumulator {
public:
    DiagnosticsAccumulator(const ModelSpec& spec, const Mesh1D& mesh, SimplexPoint uinf);

    DiagnosticsRecord record(double t, const StateField& u, double tau, int newton_iters);

    const SimplexPoint& uinf() const { return uinf_; }

private:
    ModelSpec spec_;
    Mesh1D mesh_;
    SimplexPoint uinf_;
    std::vector<double> w_inf_;
    double h_inf_ = 0.0;
    bool have_prev_ = false;
    double prev_t_ = 0.0, prev_hstar_ = 0.0, prev_ep_ = 0.0;
    double c0_hat_ = 0.0;
};

enum class FitVerdict { exponential, algebraic, inconclusive };

std::string to_string(FitVerdict v);

struct FitResult {
    double t_lo = 0.0, t_hi = 0.0;
    double lambda = 0.0;   // log Hstar ~ a - lambda t
    double r2_exp = 0.0;
    double gamma = 0.0;    // log Hstar ~ b - gamma log t
    double r2_alg = 0.0;
    FitVerdict verdict = FitVerdict::inconclusive;
};

/// Least-squares decay-law fits over a time window. With no explicit window the
/// fit uses the last half of the trusted range: samples below 1e-24 of the series
/// maximum or below `noise_floor` sit at the solver round-off plateau and are
/// excluded. Runs pass noise_floor = (1e4 * newton_tol)^2, the Hstar scale the
/// per-step residual tolerance can sustain.
FitResult decay_fit(const std::vector<double>& t, const std::vector<double>& hstar,
                    std::optional<std::pair<double, double>> window = std::nullopt,
                    double noise_floor = 0.0);

/// diagnostics.csv writers; column order is part of the interface.
void write_diagnostics_header(std::ostream& os, int n_species);
void write_diagnostics_row(std::ostream& os, const DiagnosticsRecord& rec);

}  // namespace volfill

#endif
