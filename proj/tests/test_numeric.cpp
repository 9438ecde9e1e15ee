#include <doctest.h>

#include <cmath>

#include "ipd/numeric.hpp"
#include "ipd/scaffold.hpp"

using namespace ipd;

TEST_CASE("quadrature") {
    CHECK(integrate([](double x) { return x * x; }, 0, 3) == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(integrate([](double x) { return std::sin(x); }, 0, M_PI) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(integrate_to_inf([](double x) { return std::exp(-x); }, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
    CHECK(integrate_to_inf([](double x) { return 1 / (1 + x * x); }, 0) == doctest::Approx(M_PI / 2).epsilon(1e-10));
}

TEST_CASE("distribution functions") {
    // Gamma(1, rate 2) is Exp(2)
    CHECK(gamma_cdf(0.7, 1.0, 2.0) == doctest::Approx(1 - std::exp(-1.4)).epsilon(1e-12));
    // Gamma(1/2, rate r): P(X <= x) = erf(sqrt(r x))
    CHECK(gamma_cdf(0.3, 0.5, 2.0) == doctest::Approx(std::erf(std::sqrt(0.6))).epsilon(1e-12));
    // InvGamma(3/2, a/2): P(T <= t) = P(Gamma(3/2, 1) >= a/2t)
    double a = 1, t = 0.8, s = a / (2 * t);
    double upper = std::erfc(std::sqrt(s)) + 2 * std::sqrt(s / M_PI) * std::exp(-s);
    CHECK(inverse_gamma_cdf(t, 1.5, a / 2) == doctest::Approx(upper).epsilon(1e-12));
    CHECK(exponential_cdf(2.0, 0.5) == doctest::Approx(1 - std::exp(-1.0)));
    CHECK(beta_cdf(0.25, 1.0, 1.0) == doctest::Approx(0.25));
    CHECK(beta_cdf(0.5, 0.5, 0.5) == doctest::Approx(0.5));
    CHECK(gamma_cdf(-1, 0.5, 1) == 0.0);
}

TEST_CASE("bessel I1 against its power series") {
    for (double x : {0.01, 0.5, 2.0, 7.5}) {
        double term = x / 2, sum = 0;
        for (int k = 0; k < 60; ++k) {
            sum += term;
            term *= (x * x / 4) / ((k + 1.0) * (k + 2.0));
        }
        CHECK(bessel_i1(x) == doctest::Approx(sum).epsilon(1e-12));
    }
}

TEST_CASE("monotone interpolation and table inversion") {
    MonotoneInterp m({0, 1, 2, 3}, {0, 0.1, 0.9, 1.0});
    double prev = -1;
    for (double t = 0; t <= 3; t += 0.01) {
        double v = m(t);
        CHECK(v >= prev - 1e-15);
        prev = v;
    }
    CHECK(m(1) == doctest::Approx(0.1));
    std::vector<double> x{0, 1, 2}, F{0, 0.5, 1};
    CHECK(invert_table(x, F, 0.25) == doctest::Approx(0.5));
    CHECK(invert_table(x, F, 0.75) == doctest::Approx(1.5));
}

TEST_CASE("fast inverse cube root") {
    double worst = 0;
    for (double w = 1e-300; w < 1e300; w *= 1.37) worst = std::max(worst, std::abs(inv_cbrt(w) * std::cbrt(w) - 1));
    CHECK(worst < 1e-12);
    CHECK(pareto_lifetime(1e-4, 1.0) == doctest::Approx(1e-4));
    CHECK(pareto_lifetime(1e-4, 0.125) == doctest::Approx(4e-4));
}
