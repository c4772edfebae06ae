#ifndef VOLFILL_NUMERICS_HPP
#define VOLFILL_NUMERICS_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace volfill {

/// z log z - z + 1 on [0, inf); evaluated by series near z = 1 so the value
/// stays accurate down to |z-1| ~ 1e-15 (naive evaluation bottoms out at ~1e-16).
double xlogx_deficit(double z);

/// u log(u/m) - u + m for u, m >= 0, with the limit value m at u = 0.
double bregman_boltzmann(double u, double m);

/// Adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth = 48);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;  // 0 when the ordinates carry no variance
    int n = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
class PchipCurve {
public:
    PchipCurve(std::vector<double> x, std::vector<double> y);

    double value(double s) const;
    double deriv(double s) const;
    double second(double s) const;

    double x_front() const { return x_.front(); }
    double x_back() const { return x_.back(); }

private:
    std::size_t segment(double s) const;

    std::vector<double> x_, y_, d_;
};

}  // namespace volfill

#endif
