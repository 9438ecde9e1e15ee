#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ipd/crp.hpp"
#include "ipd/kernel.hpp"
#include "ipd/numeric.hpp"
#include "ipd/stats.hpp"

using namespace ipd;

TEST_CASE("rate table") {
    auto s = crp_initial({3, 1, 2}, CrpParams{0.5, 0.25});
    auto r = crp_rates(s);
    CHECK(r.grow == doctest::Approx(6 - 3 * 0.5));
    CHECK(r.spawn == doctest::Approx(3 * 0.5));
    CHECK(r.leave == doctest::Approx(6));
    CHECK(r.new_left == doctest::Approx(0.25));
    CHECK(r.total() == doctest::Approx(2 * 6 + 0.25));
}

TEST_CASE("parameter and state validation") {
    CHECK_THROWS(CrpParams{1.5, 0}.validate());
    CHECK_THROWS(CrpParams{0.5, -1}.validate());
    CHECK_THROWS(crp_initial({2, 0}, CrpParams{}));
    CHECK(init_name(parse_init("single")) == "single");
    CHECK_THROWS(parse_init("bogus"));
}

TEST_CASE("chain preserves its invariants and logs events") {
    Rng g(31);
    auto s = crp_initial({5, 5}, CrpParams{0.5, 0.5});
    CrpLog log;
    log.keep_lineage = true;
    crp_run(s, 2.0, g, &log);
    s.validate();
    CHECK(s.customers() == std::accumulate(s.tables.begin(), s.tables.end(), int64_t(0)));
    REQUIRE_FALSE(log.events.empty());
    for (size_t i = 1; i < log.events.size(); ++i) CHECK(log.events[i].time >= log.events[i - 1].time);
    CHECK(log.events.back().time <= 2.0);
    CHECK(log.events.back().digest == sizes_digest(s.tables));
    auto csv = crp_csv(log);
    CHECK(csv.rfind("event_time,event_type,table_index,sizes_digest\n", 0) == 0);
    CHECK(lineage_csv(log).find('\n') != std::string::npos);
}

TEST_CASE("seating has the CRP table-count mean") {
    // E K_n for CRP(alpha, theta) from the one-step recursion
    double alpha = 0.5, theta = 0.5;
    int n = 50;
    double ek = 1;
    for (int m = 1; m < n; ++m) ek += (theta + alpha * ek) / (m + theta);
    Rng g(32);
    double s = 0;
    const int reps = 20000;
    for (int i = 0; i < reps; ++i) s += double(crp_seating(n, CrpParams{alpha, theta}, g).tables.size());
    CHECK(s / reps == doctest::Approx(ek).epsilon(0.01));
}

TEST_CASE("stick-breaking largest part") {
    // E[largest] >= E[first stick] = (1 - alpha) / (1 + theta)
    Rng g(33);
    double s = 0;
    const int n = 50000;
    std::vector<double> x;
    for (int i = 0; i < n; ++i) x.push_back(pd_largest_stick_breaking(0.5, 0.5, g));
    s = std::accumulate(x.begin(), x.end(), 0.0);
    CHECK(s / n > 1.0 / 3);
    // tail above 1/2 from the size-biased pick Beta(1/2, 1)
    double emp = double(std::count_if(x.begin(), x.end(), [](double t) { return t > 0.7; })) / n;
    double exact = integrate([](double v) { return 0.5 * std::pow(v, -1.5); }, 0.7, 1);
    CHECK(emp == doctest::Approx(exact).epsilon(0.03));
}

TEST_CASE("ranked sample is normalized") {
    Rng g(34);
    auto r = ranked_sample(200, CrpParams{0.5, 0.5}, 2.0, g);
    CHECK(std::accumulate(r.values.begin(), r.values.end(), 0.0) == doctest::Approx(1.0));
    CHECK(std::is_sorted(r.values.rbegin(), r.values.rend()));
}
