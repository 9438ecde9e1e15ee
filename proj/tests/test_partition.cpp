#include <doctest.h>

#include <cmath>

#include "ipd/interval_partition.hpp"

using namespace ipd;

TEST_CASE("construction and validation") {
    auto p = make_partition({0.5, 0.3, 0.2});
    CHECK(p.total_mass == doctest::Approx(1.0));
    CHECK(p.dust() == doctest::Approx(0.0));
    CHECK_FALSE(p.marked());
    CHECK_THROWS(make_partition({0.5, -0.1}));
    CHECK_THROWS(make_partition({0.5, 0.0}));
    CHECK_THROWS(make_partition({0.5, 0.6}, 1.0));
    CHECK_THROWS(make_marked({0.5, 0.5}, {0.3, 0.1}, 1.0));
    CHECK_THROWS(make_marked({0.5}, {2.0}, 1.0));
    auto d = make_partition({0.5}, 0.8);
    CHECK(d.dust() == doctest::Approx(0.3));
    CHECK(make_partition({}).empty());
}

TEST_CASE("concatenation shifts marks by diversity") {
    auto a = make_marked({0.2, 0.3}, {0.0, 0.5}, 1.0);
    auto b = make_marked({0.4}, {0.25}, 2.0);
    auto c = concatenate(a, b);
    REQUIRE(c.marked());
    CHECK(c.blocks == std::vector<double>{0.2, 0.3, 0.4});
    CHECK(c.marks[2] == doctest::Approx(1.25));
    CHECK(*c.total_diversity == doctest::Approx(3.0));
    CHECK(c.total_mass == doctest::Approx(0.9));
    auto u = concatenate(a, make_partition({0.1}));
    CHECK_FALSE(u.marked());
}

TEST_CASE("scaling maps mass by c and diversity by sqrt c") {
    auto a = make_marked({0.2, 0.3}, {0.0, 0.5}, 1.0);
    auto s = scale(4.0, a);
    CHECK(s.blocks[1] == doctest::Approx(1.2));
    CHECK(s.marks[1] == doctest::Approx(1.0));
    CHECK(*s.total_diversity == doctest::Approx(2.0));
    CHECK_THROWS(scale(0.0, a));
    auto n = normalize(s);
    CHECK(n.total_mass == doctest::Approx(1.0));
    CHECK_THROWS(normalize(make_partition({})));
}

TEST_CASE("reversal") {
    auto a = make_marked({0.2, 0.3}, {0.1, 0.5}, 1.0);
    auto r = reverse(a);
    CHECK(r.blocks == std::vector<double>{0.3, 0.2});
    CHECK(r.marks[0] == doctest::Approx(0.5));
    CHECK(r.marks[1] == doctest::Approx(0.9));
    auto rr = reverse(r);
    CHECK(rr.marks[0] == doctest::Approx(0.1));
}

TEST_CASE("ranked projection is normalized and decreasing") {
    auto r = ranked(make_partition({0.1, 0.5, 0.2}, 1.0));
    CHECK(r.values == std::vector<double>{0.5, 0.2, 0.1});
    CHECK(ranked(make_partition({})).values.empty());
}

TEST_CASE("diversity estimate recovers a planted sqrt-h count") {
    // N(h) = #{blocks > h} = floor(c / sqrt(h)) with blocks (c/k)^2
    double c = 0.05;
    std::vector<double> b;
    for (int k = 1; k <= 200000; ++k) b.push_back(c * c / (double(k) * k));
    auto p = make_partition(b);
    double D = diversity_estimate(p, p.total_mass, default_h_grid(1e-4, 10));
    CHECK(D == doctest::Approx(std::sqrt(M_PI) * c).epsilon(0.01));
    CHECK(diversity_estimate(make_partition({0.5, 0.5}), 1.0) == 0.0);
    CHECK_THROWS(diversity_estimate(p, 2 * p.total_mass));
}

TEST_CASE("json and csv round trip") {
    auto a = make_marked({0.2, 0.3}, {0.0, 0.5}, 1.0, 0.75);
    auto b = partition_from_json(nlohmann::json::parse(to_json(a).dump()));
    CHECK(b.blocks == a.blocks);
    CHECK(b.marks == a.marks);
    CHECK(*b.total_diversity == *a.total_diversity);
    CHECK(b.total_mass == a.total_mass);
    CHECK(to_csv(a) == "index,left,right,mass,div_mark\n0,0,0.20000000000000001,0.20000000000000001,0\n"
                       "1,0.20000000000000001,0.5,0.29999999999999999,0.5\n");
    CHECK(fmt17(0.1) == "0.10000000000000001");
}
