#include "volfill/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace volfill {

double xlogx_deficit(double z) {
    if (!(z >= 0.0)) throw std::domain_error("xlogx_deficit: argument must be >= 0");
    if (z == 0.0) return 1.0;
    const double d = z - 1.0;
    if (std::abs(d) > 0.5) return z * std::log(z) - z + 1.0;
    // sum_{k>=2} (-1)^k d^k / (k(k-1)); |d| <= 1/2 so the tail is geometric
    double power = d * d;
    double sum = 0.0;
    for (int k = 2; k < 200; ++k) {
        const double term = ((k & 1) ? -power : power) / (double(k) * double(k - 1));
        sum += term;
        power *= d;
        if (std::abs(power) < 1e-18 * std::abs(sum) * double(k) * double(k + 1)) break;
    }
    return sum;
}

double bregman_boltzmann(double u, double m) {
    if (u <= 0.0) return std::max(m, 0.0);
    if (m <= 0.0) return std::numeric_limits<double>::infinity();
    return m * xlogx_deficit(u / m);
}

namespace {

double simpson_panel(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                            double fb, double fm, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_panel(f, a, fa, m, fm, flm);
    const double right = simpson_panel(f, m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = simpson_panel(f, a, fa, b, fb, fm);
    return adaptive_simpson_rec(f, a, fa, b, fb, fm, whole, abs_tol, max_depth);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit fit;
    fit.n = static_cast<int>(std::min(x.size(), y.size()));
    if (fit.n < 2) return fit;
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < fit.n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / fit.n;
    const double my = sy / fit.n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < fit.n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy <= 1e-30 * fit.n * (1.0 + my * my)) {
        fit.r2 = 0.0;  // flat data: no variance to explain
        return fit;
    }
    double ss_res = 0.0;
    for (int i = 0; i < fit.n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    fit.r2 = std::max(0.0, 1.0 - ss_res / syy);
    return fit;
}

PchipCurve::PchipCurve(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("PchipCurve: need >= 2 knots");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("PchipCurve: knots must increase");

    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    d_[0] = delta[0];
    d_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
}

std::size_t PchipCurve::segment(double s) const {
    if (s <= x_.front()) return 0;
    if (s >= x_.back()) return x_.size() - 2;
    auto it = std::upper_bound(x_.begin(), x_.end(), s);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double PchipCurve::value(double s) const {
    const std::size_t i = segment(s);
    const double h = x_[i + 1] - x_[i];
    const double t = (std::clamp(s, x_.front(), x_.back()) - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
}

double PchipCurve::deriv(double s) const {
    const std::size_t i = segment(s);
    const double h = x_[i + 1] - x_[i];
    const double t = (std::clamp(s, x_.front(), x_.back()) - x_[i]) / h;
    const double t2 = t * t;
    const double g00 = (6 * t2 - 6 * t) / h;
    const double g10 = 3 * t2 - 4 * t + 1;
    const double g01 = (-6 * t2 + 6 * t) / h;
    const double g11 = 3 * t2 - 2 * t;
    return g00 * y_[i] + g10 * d_[i] + g01 * y_[i + 1] + g11 * d_[i + 1];
}

double PchipCurve::second(double s) const {
    const std::size_t i = segment(s);
    const double h = x_[i + 1] - x_[i];
    const double t = (std::clamp(s, x_.front(), x_.back()) - x_[i]) / h;
    const double k00 = (12 * t - 6) / (h * h);
    const double k10 = (6 * t - 4) / h;
    const double k01 = (-12 * t + 6) / (h * h);
    const double k11 = (6 * t - 2) / h;
    return k00 * y_[i] + k10 * d_[i] + k01 * y_[i + 1] + k11 * d_[i + 1];
}

}  // namespace volfill
