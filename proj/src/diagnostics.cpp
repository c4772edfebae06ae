#include "volfill/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "volfill/numerics.hpp"

namespace volfill {

namespace {

constexpr double kDenomFloor = 1e-30;
const double kInf = std::numeric_limits<double>::infinity();

double q_of_u0(const ModelSpec& spec, const double* row, int n) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += row[i];
    return q_eval(spec, std::clamp(1.0 - sum, 0.0, 1.0)).q;
}

}  // namespace

QbarResult qbar_and_qbar_i(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u) {
    QbarResult out;
    out.qbar_i.assign(spec.n, 0.0);
    for (int k = 0; k < mesh.N; ++k) {
        const double qv = q_of_u0(spec, u.row(k), spec.n);
        out.qbar += qv;
        for (int i = 0; i < spec.n; ++i) out.qbar_i[i] += qv * u.at(k, i);
    }
    out.qbar /= mesh.N;
    for (double& v : out.qbar_i) v /= mesh.N;
    return out;
}

FunctionalField f1_total(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u,
                         const std::vector<double>& qbar_i) {
    FunctionalField out;
    out.cellwise = CellField(mesh.N, 1);
    for (int k = 0; k < mesh.N; ++k) {
        const double qv = q_of_u0(spec, u.row(k), spec.n);
        double cell = 0.0;
        for (int i = 0; i < spec.n; ++i) {
            const double v = qv * u.at(k, i);
            // v = 0 contributes the limit value qbar_i
            cell += bregman_boltzmann(v, qbar_i[i]);
        }
        out.cellwise.at(k) = cell;
    }
    out.integral = integrate(mesh, out.cellwise);
    return out;
}

FunctionalField f2_total(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u,
                         double qbar) {
    FunctionalField out;
    out.cellwise = CellField(mesh.N, 1);
    for (int k = 0; k < mesh.N; ++k) {
        const double qv = q_of_u0(spec, u.row(k), spec.n);
        out.cellwise.at(k) = (qbar > 0.0) ? log_q_bregman(spec, qv, qbar) : 0.0;
    }
    out.integral = integrate(mesh, out.cellwise);
    return out;
}

EntropyProduction entropy_production(const ModelSpec& spec, const Mesh1D& mesh,
                                     const StateField& u) {
    EntropyProduction out;
    const int n = spec.n;
    std::vector<double> qv(mesh.N);
    for (int k = 0; k < mesh.N; ++k) qv[k] = q_of_u0(spec, u.row(k), n);

    double ep_u = 0.0, ep_q = 0.0;
    for (int f = 0; f + 1 < mesh.N; ++f) {
        const double qf = 0.5 * (qv[f] + qv[f + 1]);
        double grad2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double ds = (std::sqrt(u.at(f + 1, i)) - std::sqrt(u.at(f, i))) / mesh.dx;
            grad2 += ds * ds;
        }
        ep_u += qf * grad2;
        const double dq = (std::sqrt(qv[f + 1]) - std::sqrt(qv[f])) / mesh.dx;
        ep_q += dq * dq;
    }
    out.EP_u = ep_u * mesh.dx;
    out.EP_q = ep_q * mesh.dx;
    return out;
}

double key_gap(const ModelSpec& spec, const Mesh1D& mesh, const StateField& u,
               const SimplexPoint& uinf, double qbar) {
    const QbarResult qb = qbar_and_qbar_i(spec, mesh, u);
    const FunctionalField f1 = f1_total(spec, mesh, u, qb.qbar_i);
    const double denom = std::max(qbar, 1e-300);
    SimplexPoint pt;
    pt.u.resize(spec.n);
    double sup = 0.0;
    for (int k = 0; k < mesh.N; ++k) {
        std::copy(u.row(k), u.row(k) + spec.n, pt.u.begin());
        double h1 = 0.0;
        for (int i = 0; i < spec.n; ++i)
            h1 += bregman_boltzmann(std::max(pt.u[i], 0.0), uinf.u[i]);
        sup = std::max(sup, std::abs(f1.cellwise.at(k) / denom - h1));
    }
    return sup;
}

InequalityMonitors inequality_monitors(const ModelSpec& spec, const Mesh1D& mesh,
                                       const StateField& u, const SimplexPoint& uinf) {
    if (!in_open_simplex(uinf.u)) throw std::domain_error("inequality_monitors: uinf must be interior");
    InequalityMonitors out;
    const int n = spec.n;
    const QbarResult qb = qbar_and_qbar_i(spec, mesh, u);

    // log-Sobolev ratio per species for v = q(u0) u_i
    CellField v(mesh.N, 1);
    out.lsi_ratio.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double num = 0.0;
        for (int k = 0; k < mesh.N; ++k) {
            const double qv = q_of_u0(spec, u.row(k), n);
            v.at(k) = qv * u.at(k, i);
            num += bregman_boltzmann(v.at(k), qb.qbar_i[i]);
        }
        num *= mesh.dx;
        const double den = 4.0 * sqrt_grad_energy(mesh, v);
        out.lsi_ratio[i] = (den < kDenomFloor) ? kInf : num / den;
    }

    const FunctionalField f2 = f2_total(spec, mesh, u, qb.qbar);
    CellField qfield(mesh.N, 1);
    for (int k = 0; k < mesh.N; ++k) qfield.at(k) = q_of_u0(spec, u.row(k), n);
    const double epq = sqrt_grad_energy(mesh, qfield);
    out.csi_ratio_f2 = (epq < kDenomFloor) ? kInf : f2.integral / epq;

    double margin = kInf;
    for (int k = 0; k < mesh.N; ++k) {
        double h1 = 0.0, quad = 0.0;
        for (int i = 0; i < n; ++i) {
            h1 += bregman_boltzmann(std::max(u.at(k, i), 0.0), uinf.u[i]);
            const double d = u.at(k, i) - uinf.u[i];
            quad += d * d;
        }
        margin = std::min(margin, h1 - 0.5 * quad);
    }
    out.ckp_margin = margin;
    return out;
}

DiagnosticsAccumulator::DiagnosticsAccumulator(const ModelSpec& spec, const Mesh1D& mesh,
                                               SimplexPoint uinf)
    : spec_(spec), mesh_(mesh), uinf_(std::move(uinf)), c0_hat_(kInf) {
    if (!in_open_simplex(uinf_.u))
        throw std::domain_error("diagnostics: steady state must be interior");
    w_inf_ = entropy_gradient(spec_, uinf_).w;
    h_inf_ = entropy_density(spec_, uinf_);
}

DiagnosticsRecord DiagnosticsAccumulator::record(double t, const StateField& u, double tau,
                                                 int newton_iters) {
    DiagnosticsRecord rec;
    rec.t = t;
    rec.tau = tau;
    rec.newton_iters = newton_iters;
    const int n = spec_.n;

    rec.mass.assign(n, 0.0);
    for (int k = 0; k < mesh_.N; ++k)
        for (int i = 0; i < n; ++i) rec.mass[i] += u.at(k, i);
    for (double& m : rec.mass) m *= mesh_.dx;

    const QbarResult qb = qbar_and_qbar_i(spec_, mesh_, u);
    rec.qbar = qb.qbar;
    rec.qbar_i = qb.qbar_i;

    // relative entropy split, key gap, sup deviation, direct Bregman route
    SimplexPoint pt;
    pt.u.resize(n);
    const FunctionalField f1 = f1_total(spec_, mesh_, u, qb.qbar_i);
    double h1 = 0.0, h2 = 0.0, h3 = 0.0, keygap = 0.0, supdev = 0.0, direct = 0.0, htot = 0.0;
    const double qdenom = std::max(qb.qbar, 1e-300);
    for (int k = 0; k < mesh_.N; ++k) {
        std::copy(u.row(k), u.row(k) + n, pt.u.begin());
        const RelativeEntropyParts parts = relative_entropy_parts(spec_, pt, uinf_);
        h1 += parts.h1;
        h2 += parts.h2;
        h3 += parts.h3;
        keygap = std::max(keygap, std::abs(f1.cellwise.at(k) / qdenom - parts.h1));
        const double hval = entropy_density(spec_, pt);
        htot += hval;
        double bregman = hval - h_inf_;
        for (int i = 0; i < n; ++i) {
            supdev = std::max(supdev, std::abs(pt.u[i] - uinf_.u[i]));
            bregman -= w_inf_[i] * (pt.u[i] - uinf_.u[i]);
        }
        direct += bregman;
    }
    rec.h1 = h1 * mesh_.dx;
    rec.h2 = h2 * mesh_.dx;
    rec.h3 = h3 * mesh_.dx;
    rec.Hstar = rec.h1 + rec.h2 + rec.h3;
    rec.H = htot * mesh_.dx;
    rec.hstar_direct = direct * mesh_.dx;
    rec.keygap_sup = keygap;
    rec.sup_dev = supdev;
    rec.f1_int = f1.integral;
    rec.f2_int = f2_total(spec_, mesh_, u, qb.qbar).integral;

    const EntropyProduction ep = entropy_production(spec_, mesh_, u);
    rec.EP_u = ep.EP_u;
    rec.EP_q = ep.EP_q;

    const InequalityMonitors mon = inequality_monitors(spec_, mesh_, u, uinf_);
    rec.lsi_ratio = mon.lsi_ratio;
    double lsimax = -kInf;
    bool any_finite = false;
    for (double r : mon.lsi_ratio) {
        if (std::isfinite(r)) {
            lsimax = std::max(lsimax, r);
            any_finite = true;
        }
    }
    rec.lsi_ratio_max = any_finite ? lsimax : kInf;
    rec.csi_ratio_f2 = mon.csi_ratio_f2;
    rec.ckp_margin = mon.ckp_margin;

    // trailing-window entropy-production constant
    const double ep_sum = ep.EP_u + ep.EP_q;
    if (have_prev_ && t > prev_t_) {
        const double drop = prev_hstar_ - rec.Hstar;
        const double prod = 0.5 * (prev_ep_ + ep_sum) * (t - prev_t_);
        if (prod > kDenomFloor && drop > 0.0) c0_hat_ = std::min(c0_hat_, drop / prod);
    }
    prev_t_ = t;
    prev_hstar_ = rec.Hstar;
    prev_ep_ = ep_sum;
    have_prev_ = true;
    rec.c0_hat = c0_hat_;
    return rec;
}

std::string to_string(FitVerdict v) {
    switch (v) {
        case FitVerdict::exponential: return "exponential";
        case FitVerdict::algebraic: return "algebraic";
        case FitVerdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

FitResult decay_fit(const std::vector<double>& t, const std::vector<double>& hstar,
                    std::optional<std::pair<double, double>> window, double noise_floor) {
    if (t.size() != hstar.size()) throw std::invalid_argument("decay_fit: size mismatch");

    double t_lo, t_hi;
    double hmax = 0.0;
    for (double h : hstar) hmax = std::max(hmax, h);
    if (window) {
        t_lo = window->first;
        t_hi = window->second;
    } else {
        // last half of the trusted range: drop the round-off plateau
        const double floor = std::max({1e-300, 1e-24 * hmax, noise_floor});
        double t_end = -kInf;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (hstar[i] > floor) t_end = std::max(t_end, t[i]);
        if (!std::isfinite(t_end)) throw std::invalid_argument("decay_fit: no usable samples");
        t_lo = 0.5 * t_end;
        t_hi = t_end;
    }

    std::vector<double> ts, logh, logt, logh_pos_t;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(hstar[i] > 1e-300)) continue;
        ts.push_back(t[i]);
        logh.push_back(std::log(hstar[i]));
        if (t[i] > 0.0) {
            logt.push_back(std::log(t[i]));
            logh_pos_t.push_back(std::log(hstar[i]));
        }
    }
    if (ts.size() < 10) throw std::invalid_argument("decay_fit: fewer than 10 samples in window");

    FitResult out;
    out.t_lo = t_lo;
    out.t_hi = t_hi;
    const LineFit fe = fit_line(ts, logh);
    out.lambda = -fe.slope;
    out.r2_exp = fe.r2;
    if (logt.size() >= 10) {
        const LineFit fa = fit_line(logt, logh_pos_t);
        out.gamma = -fa.slope;
        out.r2_alg = fa.r2;
    }

    if (out.r2_exp >= 0.99 && out.r2_exp > out.r2_alg)
        out.verdict = FitVerdict::exponential;
    else if (out.r2_alg >= 0.99 && out.r2_alg > out.r2_exp)
        out.verdict = FitVerdict::algebraic;
    else
        out.verdict = FitVerdict::inconclusive;
    return out;
}

void write_diagnostics_header(std::ostream& os, int n_species) {
    os << "t";
    for (int i = 1; i <= n_species; ++i) os << ",mass_" << i;
    os << ",H,Hstar,h1,h2,h3,EP_u,EP_q,f1_int,f2_int,qbar,keygap_sup,lsi_ratio_max,"
          "csi_ratio_f2,ckp_margin,sup_dev,c0_hat,tau,newton_iters\n";
}

void write_diagnostics_row(std::ostream& os, const DiagnosticsRecord& rec) {
    os << format_full(rec.t);
    for (double m : rec.mass) os << ',' << format_full(m);
    os << ',' << format_full(rec.H) << ',' << format_full(rec.Hstar) << ',' << format_full(rec.h1)
       << ',' << format_full(rec.h2) << ',' << format_full(rec.h3) << ',' << format_full(rec.EP_u)
       << ',' << format_full(rec.EP_q) << ',' << format_full(rec.f1_int) << ','
       << format_full(rec.f2_int) << ',' << format_full(rec.qbar) << ','
       << format_full(rec.keygap_sup) << ',' << format_full(rec.lsi_ratio_max) << ','
       << format_full(rec.csi_ratio_f2) << ',' << format_full(rec.ckp_margin) << ','
       << format_full(rec.sup_dev) << ',' << format_full(rec.c0_hat) << ','
       << format_full(rec.tau) << ',' << rec.newton_iters << '\n';
}

}  // namespace volfill
