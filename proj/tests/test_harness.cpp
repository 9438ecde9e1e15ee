#include <doctest.h>

#include <cmath>

#include "ipd/config.hpp"
#include "ipd/numeric.hpp"
#include "ipd/replicas.hpp"
#include "ipd/stats.hpp"
#include "ipd/suites.hpp"

using namespace ipd;

TEST_CASE("config parsing") {
    auto c = Config::parse("# comment\nseed = 7\nlevels=0.1, 0.2 # trailing\n\nflag=yes\nname = pdip:half-zero\n");
    CHECK(c.get_int("seed", 0) == 7);
    CHECK(c.get_list("levels", {}) == std::vector<double>{0.1, 0.2});
    CHECK(c.get_bool("flag", false));
    CHECK(c.get("name", "") == "pdip:half-zero");
    CHECK(c.get_double("missing", 2.5) == 2.5);
    CHECK_THROWS(Config::parse("novalue\n"));
    CHECK_THROWS(Config::parse("=3\n"));
    auto d = Config::parse("x=abc\ny=1.5\n");
    CHECK_THROWS(d.get_double("x", 0));
    CHECK_THROWS(d.get_int("y", 0));
    CHECK(d.unused() == std::vector<std::string>{});
    auto e = Config::parse("a=1\nb=2\n");
    e.get("a", "");
    CHECK(e.unused() == std::vector<std::string>{"b"});
}

TEST_CASE("KS self-test and negative control") {
    Rng g(51);
    std::vector<double> x, shifted;
    for (int i = 0; i < 10000; ++i) {
        double e = g.exponential(1.0);
        x.push_back(e);
        shifted.push_back(e + 0.1);
    }
    auto cdf = [](double t) { return exponential_cdf(t, 1.0); };
    CHECK(ks_test("self", x, cdf, 0.03, 51).pass);
    CHECK_FALSE(ks_test("shifted", shifted, cdf, 0.03, 51).pass);
    CHECK_THROWS(ks_test("empty", {}, cdf, 0.03, 51));
    CHECK(ks_two_sample("two", x, x, 0.03, 51).value == 0.0);
}

TEST_CASE("exponential survivors match the pseudo-stationary law") {
    // M ~ Exp(rho) pushed through BESQ(0) for time y: given survival, Exp(rho / (2 y rho + 1))
    Rng g(52);
    double rho = 1, y = 0.5;
    std::vector<double> surv;
    int n = 20000, alive = 0;
    for (int i = 0; i < n; ++i) {
        double m = g.exponential(rho);
        uint64_t k = g.poisson(m / (2 * y));
        if (k == 0) continue;
        ++alive;
        surv.push_back(g.gamma(double(k), 2 * y));
    }
    CHECK(proportion_test("survival", alive, n, 1 / (2 * y * rho + 1), 3, 52).pass);
    CHECK(ks_test("mass", surv, [&](double t) { return exponential_cdf(t, rho / (2 * y * rho + 1)); }, 0.03, 52).pass);
}

TEST_CASE("moment tests") {
    std::vector<double> x(400, 1.0);
    x[0] = 3.0;
    auto ms = mean_se(x);
    CHECK(ms.mean == doctest::Approx(1.005));
    CHECK(z_test("z", x, 1.0, 3, 1).pass);
    CHECK(proportion_test("p", 50, 100, 0.5, 3, 1).pass);
    CHECK_FALSE(proportion_test("p", 90, 100, 0.5, 3, 1).pass);
    auto l = laplace_check("l", x, {1.0}, [](double) { return std::exp(-1.0); }, 0.01, 1);
    REQUIRE(l.size() == 1);
    CHECK(l[0].statistic == "rel_error");
    CHECK(pearson({1, 2, 3, 4}, {2, 1, 4, 3}) == doctest::Approx(0.6));
    CHECK(pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));
}

TEST_CASE("initial state parsing") {
    Rng g(53);
    CHECK(make_initial("empty", g).empty());
    CHECK(make_initial("explicit:0.5,0.3", g).total_mass == doctest::Approx(0.8));
    CHECK(make_initial("pdip:half-half", g).total_mass == doctest::Approx(1.0));
    auto e = make_initial("exp-pdip:half-zero:2", g);
    CHECK(e.total_mass > 0);
    CHECK_THROWS(make_initial("explicit:0.5,-1", g));
    CHECK_THROWS(make_initial("exp-pdip:half-zero:0", g));
    CHECK_THROWS(make_initial("gaussian", g));
    CHECK_THROWS(evolve_params_from(Config::parse("trunc_z=0\n")));
}

TEST_CASE("suite output is independent of the worker count") {
    SuiteConfig c;
    c.suite = "metric-axioms";
    c.overrides = Config::parse("pairs=50\ntriples=100\n");
    set_workers(1);
    auto a = run_suite(c);
    set_workers(3);
    auto b = run_suite(c);
    CHECK(suite_json(a).dump() == suite_json(b).dump());
    CHECK(suite_csv(a) == suite_csv(b));
    CHECK(a.pass());
    c.overrides = Config::parse("bogus=1\n");
    CHECK_THROWS(run_suite(c));
    c.suite = "nonexistent";
    CHECK_THROWS(run_suite(c));
}
