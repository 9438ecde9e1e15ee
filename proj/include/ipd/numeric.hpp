#pragma once

#include <functional>
#include <vector>

namespace ipd {

// Adaptive Gauss-Kronrod on [a,b].
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);
// Integral over [a, inf) via exp-sinh.
double integrate_to_inf(const std::function<double(double)>& f, double a, double tol = 1e-12);

// CDFs used as test references.
double gamma_cdf(double x, double shape, double rate);
double inverse_gamma_cdf(double x, double shape, double scale);
double exponential_cdf(double x, double rate);
double beta_cdf(double x, double a, double b);

double bessel_i1(double x);
double lgamma_fn(double x);

// Monotone (Fritsch-Carlson) cubic interpolant.
class MonotoneInterp {
public:
    MonotoneInterp() = default;
    MonotoneInterp(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;
    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& y() const { return y_; }

private:
    std::vector<double> x_, y_, m_;
};

// Inverse of a nondecreasing tabulated function by bisection on the
// table then linear interpolation within the bracketing cell.
double invert_table(const std::vector<double>& x, const std::vector<double>& F, double u);

}  // namespace ipd
