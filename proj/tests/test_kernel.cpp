#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ipd/crp.hpp"
#include "ipd/kernel.hpp"
#include "ipd/numeric.hpp"
#include "ipd/stats.hpp"

using namespace ipd;

namespace {

double sq_integral(const std::function<double(double)>& f, double hi = INFINITY) {
    // x = t^2 removes inverse square-root singularities at 0
    auto g = [&](double t) { return 2 * t * f(t * t); };
    if (!std::isinf(hi)) return integrate(g, 0, std::sqrt(hi), 1e-11);
    return integrate(g, 0, 1, 1e-11) + integrate(g, 1, 10, 1e-11) + integrate_to_inf(g, 10, 1e-11);
}

// 5-point Gauss-Legendre on a short interval where f is smooth
double gauss5(const std::function<double(double)>& f, double a, double b) {
    static const double xs[] = {0.0, 0.5384693101056831, 0.9061798459386640};
    static const double ws[] = {0.5688888888888889, 0.4786286704993665, 0.2369268850561891};
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = ws[0] * f(c);
    for (int k = 1; k < 3; ++k) s += ws[k] * (f(c - h * xs[k]) + f(c + h * xs[k]));
    return s * h;
}

// P(largest part of PD(alpha, theta) > x) for x >= 1/2
double pd_largest_tail(double x, double alpha, double theta) {
    double a = 1 - alpha, b = theta + alpha;
    double c = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b));
    return integrate([&](double v) { return c * std::pow(v, a - 2) * std::pow(1 - v, b - 1); }, x, 1, 1e-12);
}

}  // namespace

TEST_CASE("exponent identities") {
    for (double l : {0.1, 1.0, 3.0}) {
        CHECK(psi(psi_inverse(l)) == doctest::Approx(l).epsilon(1e-12));
        CHECK(inverse_local_time_exponent(l) == doctest::Approx(3 * std::cbrt(l / (4 * M_PI))));
    }
    CHECK(std::exp(-psi_inverse(1.0)) == doctest::Approx(0.3127).epsilon(1e-4));
    // phi_y is the Laplace exponent of the ladder Levy measure
    double y = 0.7;
    auto pi_y = closed_form("levy_pi_y", {{"y", y}});
    for (double l : {0.5, 2.0}) {
        double num = sq_integral([&](double x) { return -std::expm1(-l * x) * pi_y(x); });
        CHECK(phi_y(l, y) == doctest::Approx(num).epsilon(1e-8));
    }
}

TEST_CASE("densities integrate to one") {
    for (auto [name, params] : std::vector<std::pair<std::string, std::map<std::string, double>>>{
             {"clade_overshoot_given_mass", {{"a", 0.7}}},
             {"clade_mass_given_lifetime", {{"z", 1.3}}},
             {"lmb_density", {{"a", 1.0}, {"y", 0.25}}},
             {"lmb_density", {{"a", 1.0}, {"y", 4.0}}},
             {"q1_density", {{"y", 0.5}}}}) {
        auto f = closed_form(name, params);
        CHECK(sq_integral(f.f) == doctest::Approx(1.0).epsilon(1e-7));
    }
    auto b = closed_form("besq0_density", {{"a", 1.0}, {"y", 0.5}});
    CHECK(b.atom == doctest::Approx(std::exp(-1.0)));
    CHECK(sq_integral(b.f) + b.atom == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("LMB Laplace transform matches its density") {
    for (double y : {0.25, 1.0}) {
        for (double l : {0.5, 2.0}) {
            double num = sq_integral([&](double x) { return std::exp(-l * x) * lmb_density(x, 1.0, y); });
            CHECK(lmb_laplace(l, 1.0, y) == doctest::Approx(num).epsilon(1e-7));
        }
    }
}

TEST_CASE("BESQ(0) cdf matches the Poisson-gamma series") {
    double a = 1.0, y = 0.5, b = 0.8;
    double mu = a / (2 * y), s = std::exp(-mu), p = std::exp(-mu);
    for (int k = 1; k < 80; ++k) {
        p *= mu / k;
        s += p * gamma_cdf(b, k, 1 / (2 * y));
    }
    CHECK(besq0_cdf(b, a, y) == doctest::Approx(s).epsilon(1e-10));
}

TEST_CASE("LMB sampler plus independent Gamma(1/2) is BESQ(0) given survival") {
    // surviving BESQ(0) mass is Poisson(a/2y) given >= 1 mixing Gamma(k, 1/2y)
    Rng g(21), h(22);
    double a = 1.0, y = 0.5;
    std::vector<double> lhs, rhs;
    for (int i = 0; i < 40000; ++i) lhs.push_back(sample_lmb(a, y, g) + g.gamma(0.5, 2 * y));
    while (rhs.size() < 40000) {
        uint64_t k = h.poisson(a / (2 * y));
        if (k) rhs.push_back(h.gamma(double(k), 2 * y));
    }
    CHECK(ks_distance_two_sample(lhs, rhs) < 0.015);
}

TEST_CASE("LMB sampler matches its law across scales") {
    Rng g(23);
    for (auto [y, n] : {std::pair{1e-6, 300}, {1e-3, 20000}, {0.01, 20000}, {0.3, 20000}, {5.0, 20000}, {1e5, 20000}}) {
        std::vector<double> x;
        for (int i = 0; i < n; ++i) x.push_back(sample_lmb(1.0, y, g));
        std::sort(x.begin(), x.end());
        auto f = [y = y](double t) { return lmb_density(t, 1.0, y); };
        double F = sq_integral(f, x[0]), d = 0;
        for (size_t i = 0; i < x.size(); ++i) {
            if (i) F += gauss5(f, x[i - 1], x[i]);
            d = std::max({d, std::abs(F - double(i) / n), std::abs(F - double(i + 1) / n)});
        }
        CHECK(d < (n < 1000 ? 0.08 : 0.015));
    }
}

TEST_CASE("entrance law survival and remainder") {
    Rng g(24);
    int alive = 0;
    const int n = 6000;
    std::vector<double> rest;
    for (int i = 0; i < n; ++i) {
        auto p = sample_entrance_type1(1.0, 0.5, g);
        if (p.blocks.empty()) continue;
        ++alive;
        rest.push_back(p.total_mass - p.blocks[0]);
    }
    double q = 1 - std::exp(-1.0);
    CHECK(std::abs(double(alive) / n - q) < 4 * std::sqrt(q * (1 - q) / n));
    CHECK(ks_distance(rest, [](double b) { return gamma_cdf(b, 0.5, 1.0); }) < 0.03);
}

TEST_CASE("ladder mean mass and marks") {
    Rng g(25);
    double s = 0;
    const int n = 5000;
    for (int i = 0; i < n; ++i) {
        auto p = sample_ladder(2.0, 0.5, g);
        s += p.total_mass;
        if (i < 50) {
            REQUIRE(p.marked());
            CHECK(std::is_sorted(p.marks.begin(), p.marks.end()));
            CHECK(*p.total_diversity == doctest::Approx(2.0));
        }
    }
    // mean = s * Phi'(0) = s * sqrt(2y) / 2
    CHECK(s / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("type-1 kernel total mass Laplace transform") {
    Rng g(26);
    auto beta = make_partition({0.5, 0.3, 0.2});
    const int n = 8000;
    double y = 0.5;
    std::vector<double> m;
    for (int i = 0; i < n; ++i) m.push_back(sample_kernel_type1(beta, y, g).total_mass);
    for (double l : {0.5, 2.0}) {
        std::vector<double> e;
        for (double x : m) e.push_back(std::exp(-l * x));
        auto ms = mean_se(e);
        CHECK(std::abs(ms.mean - std::exp(-l / (2 * y * l + 1))) < 4 * ms.se);
    }
}

TEST_CASE("PDIP is a normalized marked partition with the PD largest-part law") {
    for (auto [v, theta] : {std::pair{PdipVariant::HalfHalf, 0.5}, std::pair{PdipVariant::Half0, 0.0}}) {
        Rng g(27);
        std::vector<double> top;
        for (int i = 0; i < 20000; ++i) {
            auto p = sample_pdip(v, g);
            if (i < 20) {
                CHECK(p.total_mass == doctest::Approx(1.0));
                CHECK(p.marked());
            }
            top.push_back(p.blocks.empty() ? 0.0 : *std::max_element(p.blocks.begin(), p.blocks.end()));
        }
        for (double x : {0.6, 0.75, 0.9}) {
            double emp = double(std::count_if(top.begin(), top.end(), [x](double t) { return t > x; })) / top.size();
            CHECK(emp == doctest::Approx(pd_largest_tail(x, 0.5, theta)).epsilon(0.05));
        }
    }
    CHECK(variant_name(parse_variant("half-zero")) == "half-zero");
    CHECK_THROWS(parse_variant("third"));
}

TEST_CASE("closed-form catalogue") {
    for (const auto& n : closed_form_names()) CHECK_FALSE(kind_name(closed_form(n, {{"a", 1}, {"y", 1}, {"z", 1}}).kind).empty());
    CHECK_THROWS(closed_form("nope"));
    CHECK_THROWS(closed_form("lmb_density", {{"a", 1}}));
    CHECK(closed_form("clade_length_tail")(1.0) == doctest::Approx(0.9529).epsilon(1e-4));
    CHECK(closed_form("clade_jump_tail")(1.0) == doctest::Approx(0.6752).epsilon(1e-4));
}
