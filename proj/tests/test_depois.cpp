#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ipd/depois.hpp"

using namespace ipd;

namespace {

// B f = sum_i x_i f_ii - sum_ij x_i x_j f_ij - sum_i (theta x_i + alpha) f_i by central differences
double fd_generator(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x, double alpha,
                    double theta) {
    const double h = 1e-4;
    const size_t n = x.size();
    auto at = [&](size_t i, double di, size_t j, double dj) {
        auto z = x;
        z[i] += di;
        z[j] += dj;
        return f(z);
    };
    double out = 0;
    for (size_t i = 0; i < n; ++i) {
        double fi = (at(i, h, i, 0) - at(i, -h, i, 0)) / (2 * h);
        out -= (theta * x[i] + alpha) * fi;
        for (size_t j = 0; j < n; ++j) {
            double fij = (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4 * h * h);
            out += ((i == j ? x[i] : 0.0) - x[i] * x[j]) * fij;
        }
    }
    return out;
}

double q(int m, const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += std::pow(v, m + 1);
    return s;
}

}  // namespace

TEST_CASE("generator values at simple points") {
    CHECK(ekp_generator(SymPoly{1, -1}, {1.0}, 0.5, 0.0) == doctest::Approx(-2.0));
    CHECK(ekp_generator(SymPoly{2, -1}, {0.5, 0.5}, 0.5, 0.0) == doctest::Approx(1.5));
    CHECK(ekp_generator(SymPoly{1, -1}, {1.0}, 0.5, 0.5) == doctest::Approx(-4.0));
    CHECK(ekp_generator(SymPoly{0, -1}, {0.3, 0.7}, 0.5, 0.5) == 0.0);
}

TEST_CASE("generator matches finite differences") {
    // the identity holds on the simplex, where q_0 = 1
    std::vector<double> x{0.4, 0.3, 0.2, 0.1};
    for (double theta : {0.0, 0.5, 2.0}) {
        for (int m : {1, 2, 3}) {
            double fd = fd_generator([m](const std::vector<double>& z) { return q(m, z); }, x, 0.5, theta);
            CHECK(ekp_generator(SymPoly{m, -1}, x, 0.5, theta) == doctest::Approx(2 * fd).epsilon(1e-5));
        }
        double fd = fd_generator([](const std::vector<double>& z) { return q(1, z) * q(2, z); }, x, 0.5, theta);
        CHECK(ekp_generator(parse_sympoly("q1*q2"), x, 0.5, theta) == doctest::Approx(2 * fd).epsilon(1e-5));
    }
}

TEST_CASE("polynomial parsing") {
    auto p = parse_sympoly("q3");
    CHECK(p.m == 3);
    CHECK(p.n == -1);
    auto r = parse_sympoly("q1*q2");
    CHECK(r.m == 1);
    CHECK(r.n == 2);
    CHECK_THROWS(parse_sympoly("p1"));
    CHECK(q_value(0, {0.1}) == 1.0);
    CHECK(q_value(2, {0.5, 0.5}) == doctest::Approx(0.25));
}

TEST_CASE("time change under constant mass is linear") {
    std::vector<double> levels, masses;
    for (int i = 0; i <= 100; ++i) {
        levels.push_back(i * 0.01);
        masses.push_back(2.0);
    }
    auto rho = time_change(levels, masses, {0.0, 0.1, 0.4});
    CHECK(rho[0] == doctest::Approx(0.0));
    CHECK(rho[1] == doctest::Approx(0.2));
    CHECK(rho[2] == doctest::Approx(0.8));
    auto past = time_change(levels, masses, {0.6});
    CHECK(std::isnan(past[0]));
    CHECK_THROWS(time_change(levels, masses, {0.2, 0.1}));
}

TEST_CASE("time change stops at extinction") {
    auto rho = time_change({0, 0.5, 1.0}, {1.0, 1.0, 0.0}, {0.25, 0.75});
    CHECK(rho[0] == doctest::Approx(0.25));
    CHECK(std::isnan(rho[1]));
}

TEST_CASE("pathwise de-Poissonization gives unit-mass states") {
    PathEvolution ev(make_partition({1.0}), Mode::Type1, EvolveParams{}, Rng(41));
    auto dp = depoissonize(ev, {0.01, 0.05});
    for (size_t k = 0; k < dp.states.size(); ++k) {
        CHECK(dp.states[k].total_mass == doctest::Approx(1.0));
        CHECK(dp.rho[k] > 0);
    }
    if (dp.states.size() == 2) CHECK(dp.rho[1] > dp.rho[0]);
    CHECK(depois_csv({dp}).rfind("replica,u,rho,block_index,mass,div_mark\n", 0) == 0);
}

TEST_CASE("trace CSV round trip feeds the trace time change") {
    Rng g(42);
    std::vector<double> levels;
    for (int i = 0; i <= 40; ++i) levels.push_back(0.005 * i);
    auto tr = evolve(make_partition({0.5, 0.5}), Mode::Type1, levels, EvolveParams{}, g);
    std::istringstream in(trace_csv({tr, tr}));
    auto back = traces_from_csv(in);
    REQUIRE(back.size() == 2);
    REQUIRE(back[1].levels == tr.levels);
    for (size_t l = 0; l < levels.size(); ++l) {
        CHECK(back[1].states[l].blocks == tr.states[l].blocks);
        CHECK(back[1].mass_series[l] == doctest::Approx(tr.mass_series[l]).epsilon(1e-14));
    }
    auto a = depoissonize(tr, {0.02, 0.05}), b = depoissonize(back[0], {0.02, 0.05});
    REQUIRE(a.rho.size() == b.rho.size());
    for (size_t k = 0; k < a.rho.size(); ++k) CHECK(a.rho[k] == doctest::Approx(b.rho[k]).epsilon(1e-12));
    std::istringstream bad("replica,level\n");
    CHECK_THROWS_AS(traces_from_csv(bad), std::invalid_argument);
}
