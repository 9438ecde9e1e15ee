#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "ipd/replicas.hpp"
#include "ipd/rng.hpp"

using namespace ipd;

TEST_CASE("philox4x32-10 known answers") {
    auto a = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(a == std::array<uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    auto b = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(b == std::array<uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    auto c = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(c == std::array<uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
    Rng a(42, 3), b(42, 3), c(42, 4);
    for (int i = 0; i < 100; ++i) {
        auto x = a();
        CHECK(x == b());
        CHECK(x != c());
    }
    Rng p(42, 3);
    std::set<uint64_t> first;
    for (uint64_t k = 0; k < 1000; ++k) first.insert(p.child(k)());
    CHECK(first.size() == 1000);
    CHECK(p.child(5)() == Rng(42, 3).child(5)());
}

TEST_CASE("child streams do not depend on parent draws") {
    Rng a(7), b(7);
    for (int i = 0; i < 37; ++i) b();
    CHECK(a.child(9)() == b.child(9)());
}

TEST_CASE("variate moments") {
    Rng g(1);
    const int n = 200000;
    double su = 0, se = 0, sg = 0, sp = 0, sb = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
        double u = g.uniform();
        REQUIRE(u > 0);
        REQUIRE(u < 1);
        su += u;
        se += g.exponential(2.0);
        sg += g.gamma(0.5, 3.0);
        sp += double(g.poisson(4.5));
        sb += g.beta(0.5, 1.5);
        double z = g.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.005));
    CHECK(se / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sg / n == doctest::Approx(1.5).epsilon(0.02));
    CHECK(sp / n == doctest::Approx(4.5).epsilon(0.01));
    CHECK(sb / n == doctest::Approx(0.25).epsilon(0.01));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("below is uniform on its range") {
    Rng g(3);
    std::array<int, 7> h{};
    for (int i = 0; i < 70000; ++i) h[g.below(7)]++;
    for (int c : h) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("parallel map matches serial map and rethrows") {
    auto f = [](size_t r) { return Rng(11).child(r).uniform(); };
    CHECK(parallel_map(500, f) == serial_map(500, f));
    CHECK_THROWS_AS(parallel_map(10, [](size_t r) -> int {
                        if (r == 7) throw std::runtime_error("x");
                        return 0;
                    }),
                    std::runtime_error);
}
