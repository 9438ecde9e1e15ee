#include "ipd/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace ipd {

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol);
}

double integrate_to_inf(const std::function<double(double)>& f, double a, double tol) {
    boost::math::quadrature::exp_sinh<double> integrator;
    auto g = [&](double t) { return f(a + t); };
    return integrator.integrate(g, tol);
}

double gamma_cdf(double x, double shape, double rate) {
    if (x <= 0) return 0.0;
    return boost::math::gamma_p(shape, x * rate);
}

double inverse_gamma_cdf(double x, double shape, double scale) {
    if (x <= 0) return 0.0;
    return boost::math::gamma_q(shape, scale / x);
}

double exponential_cdf(double x, double rate) {
    if (x <= 0) return 0.0;
    return -std::expm1(-rate * x);
}

double beta_cdf(double x, double a, double b) {
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    return boost::math::ibeta(a, b, x);
}

double bessel_i1(double x) { return boost::math::cyl_bessel_i(1, x); }

double lgamma_fn(double x) { return boost::math::lgamma(x); }

MonotoneInterp::MonotoneInterp(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneInterp: need >= 2 matching points");
    std::vector<double> d(n - 1);
    for (size_t i = 0; i + 1 < n; ++i) d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    m_.assign(n, 0.0);
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (size_t i = 1; i + 1 < n; ++i) m_[i] = (d[i - 1] * d[i] <= 0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
    for (size_t i = 0; i + 1 < n; ++i) {
        if (d[i] == 0) {
            m_[i] = m_[i + 1] = 0;
            continue;
        }
        double a = m_[i] / d[i], b = m_[i + 1] / d[i];
        double s = a * a + b * b;
        if (s > 9) {
            double t = 3 / std::sqrt(s);
            m_[i] = t * a * d[i];
            m_[i + 1] = t * b * d[i];
        }
    }
}

double MonotoneInterp::operator()(double t) const {
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    size_t i = std::upper_bound(x_.begin(), x_.end(), t) - x_.begin() - 1;
    double h = x_[i + 1] - x_[i];
    double s = (t - x_[i]) / h;
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * m_[i] + (-2 * s3 + 3 * s2) * y_[i + 1] +
           (s3 - s2) * h * m_[i + 1];
}

double invert_table(const std::vector<double>& x, const std::vector<double>& F, double u) {
    if (u <= F.front()) return x.front();
    if (u >= F.back()) return x.back();
    size_t i = std::upper_bound(F.begin(), F.end(), u) - F.begin();
    double f0 = F[i - 1], f1 = F[i];
    if (f1 <= f0) return x[i];
    return x[i - 1] + (x[i] - x[i - 1]) * (u - f0) / (f1 - f0);
}

}  // namespace ipd
