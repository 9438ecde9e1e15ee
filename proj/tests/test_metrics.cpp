#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ipd/metrics.hpp"
#include "ipd/rng.hpp"

using namespace ipd;

namespace {

// Brute force over all pairs of equal-size index subsets, matched in order.
double oracle_dI(const IntervalPartition& a, const IntervalPartition& b) {
    const size_t n = a.size(), m = b.size();
    double best = std::numeric_limits<double>::infinity();
    for (uint32_t S = 0; S < (1u << n); ++S) {
        for (uint32_t T = 0; T < (1u << m); ++T) {
            if (__builtin_popcount(S) != __builtin_popcount(T)) continue;
            std::vector<size_t> is, js;
            for (size_t i = 0; i < n; ++i)
                if (S >> i & 1) is.push_back(i);
            for (size_t j = 0; j < m; ++j)
                if (T >> j & 1) js.push_back(j);
            double gap = 0, matched_a = 0, matched_b = 0, diff = 0;
            for (size_t k = 0; k < is.size(); ++k) {
                double u = a.blocks[is[k]], v = b.blocks[js[k]];
                gap = std::max(gap, std::abs(a.marks[is[k]] - b.marks[js[k]]));
                matched_a += u;
                matched_b += v;
                diff += std::abs(u - v);
            }
            double dis = std::max({std::abs(*a.total_diversity - *b.total_diversity), gap,
                                   a.total_mass - matched_a + diff, b.total_mass - matched_b + diff});
            best = std::min(best, dis);
        }
    }
    return best;
}

IntervalPartition random_marked(Rng& g, size_t max_blocks) {
    size_t k = g.below(max_blocks + 1);
    std::vector<double> b, m;
    double d = 0;
    for (size_t i = 0; i < k; ++i) {
        b.push_back(g.uniform());
        d += g.exponential(3.0);
        m.push_back(d);
    }
    return make_marked(b, m, d + g.exponential(3.0));
}

}  // namespace

TEST_CASE("d_I agrees with subset enumeration") {
    Rng g(2024);
    for (int t = 0; t < 300; ++t) {
        auto a = random_marked(g, 6), b = random_marked(g, 6);
        double o = oracle_dI(a, b);
        CHECK(distance_dI(a, b) == doctest::Approx(o).epsilon(1e-12));
        CHECK(distance_dI_enumerate(a, b) == doctest::Approx(o).epsilon(1e-12));
    }
}

TEST_CASE("hand-computed distances") {
    auto one = make_partition({1.0});
    auto two = make_partition({0.6, 0.4});
    CHECK(distance_dH_prime(one, two) == doctest::Approx(0.8));
    CHECK(distance_dH(one, two) == doctest::Approx(0.4));
    auto a = make_marked({0.5}, {0.2}, 1.0);
    auto e = make_marked({}, {}, 0.0);
    CHECK(distance_dI(a, e) == doctest::Approx(1.0));
    CHECK(distance_dI(a, a) == 0.0);
    auto b = make_marked({0.5}, {0.3}, 1.0);
    CHECK(distance_dI(a, b) == doctest::Approx(0.1));
    CHECK_THROWS(distance_dI(one, a));
}

TEST_CASE("d_H treats dust as a closed gap") {
    auto a = make_partition({0.5}, 1.0);
    auto b = make_partition({0.5, 0.5});
    CHECK(distance_dH(a, b) == doctest::Approx(0.25));
    auto c = make_partition({1.0});
    CHECK(distance_dH(a, c) == doctest::Approx(0.5));
}
