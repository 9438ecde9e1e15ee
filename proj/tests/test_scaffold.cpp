#include <doctest.h>

#include <cmath>
#include <random>

#include "ipd/evolve.hpp"
#include "ipd/kernel.hpp"
#include "ipd/scaffold.hpp"

using namespace ipd;

namespace {

Spindle parabola(double zeta, double height) {
    Spindle s;
    s.zeta = zeta;
    s.delta = zeta / 100;
    for (int i = 0; i <= 100; ++i) {
        double u = i * s.delta;
        s.values.push_back(height * u * (zeta - u));
    }
    s.amplitude = height * zeta * zeta / 4;
    return s;
}

// Starts at 0.5 with unit downward drift; two jumps crossing level 0.4.
Scaffolding hand_path() {
    Scaffolding s;
    s.initial = 0.5;
    s.trunc_z = 1e-4;
    s.drift = -1;
    s.horizon = 2.5;
    s.explicit_spindles = {parabola(1.0, 1.0), parabola(0.8, 2.0)};
    s.events.push_back({0.6, -0.1, 1.0, 0.9, -1, 0});
    s.events.push_back({1.8, -0.3, 0.8, 0.5, -1, 1});
    return s;
}

}  // namespace

TEST_CASE("path value and hitting times on a hand-built path") {
    auto s = hand_path();
    CHECK(path_value(s, 0.0) == doctest::Approx(0.5));
    CHECK(path_value(s, 0.6) == doctest::Approx(0.9));
    CHECK(path_value(s, 1.0) == doctest::Approx(0.5));
    CHECK(path_value(s, 2.5) == doctest::Approx(-0.2));
    CHECK(*hitting_time(s, 0.0) == doctest::Approx(0.5));
    CHECK_FALSE(hitting_time(s, -0.5).has_value());
    CHECK_THROWS(path_value(s, 3.0));
}

TEST_CASE("band occupation of a linear segment") {
    CHECK(band_occupation(1.0, -2.0, 1.0, 0.2, 0.4) == doctest::Approx(0.1));
    CHECK(band_occupation(1.0, -2.0, 0.2, 0.2, 0.4) == 0.0);
    CHECK(band_occupation(0.3, -1.0, 1.0, 0.2, 0.4) == doctest::Approx(0.1));
}

TEST_CASE("skewer of a hand-built path") {
    auto s = hand_path();
    EvolveParams p;
    p.lt_band = 1e-3;
    p.dust_correction = false;
    auto beta = skewer(s, 0.4, p);
    REQUIRE(beta.size() == 2);
    CHECK(beta.blocks[0] == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(beta.blocks[1] == doctest::Approx(0.14).epsilon(1e-3));
    CHECK(beta.marks[0] == doctest::Approx(1.0));
    CHECK(beta.marks[1] == doctest::Approx(2.0));
    CHECK(*beta.total_diversity == doctest::Approx(3.0));
    CHECK(local_time(s, 0.4, s.horizon, 1e-3) == doctest::Approx(3.0));
}

TEST_CASE("drift compensates the truncated jumps") {
    // Pareto(3/2) above z has mean 3z
    for (double z : {1e-6, 1e-4, 1e-2}) CHECK(scaffold_rate(z) * 3 * z == doctest::Approx(-scaffold_drift(z)));
}

TEST_CASE("truncation dust rate matches a Monte Carlo of crossing spindles") {
    // crossing spindle: mass a with density a^{-3/2} / (2 sqrt pi), over- and
    // undershoot iid a * InvGamma(3/2, 1/2); dust from lifetimes below z gives
    // kappa(z) = sqrt(z / pi) * E[(G1 + G2)^{-1/2}]
    std::mt19937_64 eng(99);
    std::gamma_distribution<double> gam(1.5, 1.0);
    const int n = 2000000;
    double s = 0;
    for (int i = 0; i < n; ++i) {
        double g1 = 0.5 / gam(eng), g2 = 0.5 / gam(eng);
        s += 1 / std::sqrt(g1 + g2);
    }
    double z = 1e-4;
    CHECK(truncation_dust_rate(z) == doctest::Approx(std::sqrt(z / M_PI) * s / n).epsilon(0.005));
}

TEST_CASE("first passage from above is finite up to the polynomial tail") {
    Rng g(12);
    int finite = 0;
    double mean_exp = 0;
    const int n = 400;
    for (int i = 0; i < n; ++i) {
        double t = first_passage_time(0.2, 0.0, 1e-3, 50, g);
        finite += std::isfinite(t);
        if (std::isfinite(t)) mean_exp += std::exp(-t);
    }
    // P(T > 50) = 0.2 (pi/2)^(1/3) 50^(-2/3) / Gamma(1/3) + o(1), about 0.0064
    CHECK(n - finite <= 12);
    CHECK(mean_exp / n == doctest::Approx(std::exp(-0.2 * psi_inverse(1.0))).epsilon(0.05));
}

TEST_CASE("sampled scaffolding is consistent") {
    Rng g(13);
    auto pool = SpindlePool::shared_default();
    auto s = sample_scaffolding(0.1, 1e-3, pool, g);
    CHECK(s.drift == doctest::Approx(scaffold_drift(1e-3)));
    double x = s.initial, t = 0;
    for (auto& e : s.events) {
        CHECK(e.t >= t);
        CHECK(e.zeta >= 1e-3);
        CHECK(e.birth == doctest::Approx(x + s.drift * (e.t - t)));
        CHECK(e.after == doctest::Approx(e.birth + e.zeta));
        x = e.after;
        t = e.t;
    }
}

TEST_CASE("bi-clade decomposition of a sampled path") {
    Rng g(14);
    CladeRunParams p;
    p.trunc_z = 1e-3;
    p.target_local_time = 5;
    auto run = simulate_clades(p, *SpindlePool::shared_default(), g);
    CHECK(run.local_time >= 5);
    size_t good = 0;
    for (auto& c : run.clades) {
        if (c.degenerate) continue;
        ++good;
        CHECK(c.m0 > 0);
        CHECK(c.jplus > 0);
        CHECK(c.zeta_plus >= c.jplus);
        CHECK(c.len >= 0);
    }
    CHECK(good > 10);
}
