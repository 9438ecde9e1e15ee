#include "ipd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ipd {

namespace {

struct Pt {
    double a, b;
};

using Front = std::vector<Pt>;

// Keep points not dominated in (a, b); result sorted by a with b strictly decreasing.
void prune(Front& f) {
    std::sort(f.begin(), f.end(), [](const Pt& x, const Pt& y) { return x.a < y.a || (x.a == y.a && x.b < y.b); });
    Front out;
    out.reserve(f.size());
    double best_b = std::numeric_limits<double>::infinity();
    for (const Pt& p : f) {
        if (p.b < best_b) {
            out.push_back(p);
            best_b = p.b;
        }
    }
    f.swap(out);
}

}  // namespace

double min_mass_distortion(const IntervalPartition& beta, const IntervalPartition& gamma, double mark_tol) {
    const size_t n = beta.blocks.size(), m = gamma.blocks.size();
    const bool use_marks = mark_tol >= 0;
    if (use_marks && (!beta.marked() || !gamma.marked()))
        throw std::invalid_argument("distance: marks required on both partitions");
    // prev[j], cur[j] hold frontiers for prefixes (i-1, j) and (i, j).
    std::vector<Front> prev(m + 1, Front{{0.0, 0.0}}), cur(m + 1);
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = Front{{0.0, 0.0}};
        const double u = beta.blocks[i - 1];
        for (size_t j = 1; j <= m; ++j) {
            const double v = gamma.blocks[j - 1];
            Front f = prev[j];
            f.insert(f.end(), cur[j - 1].begin(), cur[j - 1].end());
            bool allowed = !use_marks || std::abs(beta.marks[i - 1] - gamma.marks[j - 1]) <= mark_tol;
            if (allowed) {
                const double d = std::abs(u - v);
                for (const Pt& p : prev[j - 1]) f.push_back({p.a + d - u, p.b + d - v});
            }
            prune(f);
            cur[j] = std::move(f);
        }
        std::swap(prev, cur);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const Pt& p : prev[m]) best = std::min(best, std::max(beta.total_mass + p.a, gamma.total_mass + p.b));
    return std::max(best, 0.0);
}

double distance_dI(const IntervalPartition& beta, const IntervalPartition& gamma) {
    if (!beta.marked() || !gamma.marked()) throw std::invalid_argument("distance_dI: marks required");
    const double div_term = std::abs(*beta.total_diversity - *gamma.total_diversity);
    std::vector<double> cand{0.0};
    for (double x : beta.marks)
        for (double y : gamma.marks) cand.push_back(std::abs(x - y));
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    // m(t) is nonincreasing in t; the minimum of max(t, m(t)) sits at the
    // first candidate with m(t) <= t or just before it.
    auto m = [&](size_t k) { return min_mass_distortion(beta, gamma, cand[k]); };
    size_t lo = 0, hi = cand.size();
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (m(mid) <= cand[mid])
            hi = mid;
        else
            lo = mid + 1;
    }
    double best = std::numeric_limits<double>::infinity();
    if (lo < cand.size()) best = std::max(cand[lo], m(lo));
    if (lo > 0) best = std::min(best, std::max(cand[lo - 1], m(lo - 1)));
    return std::max(best, div_term);
}

double distance_dH_prime(const IntervalPartition& beta, const IntervalPartition& gamma) {
    return min_mass_distortion(beta, gamma, -1.0);
}

namespace {

struct GapSet {
    std::vector<double> pts;  // sorted
    bool has_tail = false;    // closed interval [tail_lo, tail_hi]
    double tail_lo = 0, tail_hi = 0;
};

GapSet complement(const IntervalPartition& p) {
    GapSet g;
    long double pos = 0;
    g.pts.push_back(0.0);
    for (double b : p.blocks) {
        pos += b;
        g.pts.push_back(double(pos));
    }
    if (p.total_mass > double(pos) * (1 + 1e-15) + 1e-300) {
        g.has_tail = true;
        g.tail_lo = double(pos);
        g.tail_hi = p.total_mass;
        g.pts.push_back(p.total_mass);
    }
    return g;
}

double dist_to(const GapSet& g, double x) {
    if (g.has_tail && x >= g.tail_lo && x <= g.tail_hi) return 0.0;
    auto it = std::lower_bound(g.pts.begin(), g.pts.end(), x);
    double d = std::numeric_limits<double>::infinity();
    if (it != g.pts.end()) d = *it - x;
    if (it != g.pts.begin()) d = std::min(d, x - *(it - 1));
    return d;
}

double directed(const GapSet& from, const GapSet& to) {
    double d = 0;
    for (double x : from.pts) d = std::max(d, dist_to(to, x));
    if (from.has_tail) {
        // interior maxima of the distance over the interval are midpoints of
        // consecutive points of the target set
        for (size_t k = 0; k + 1 < to.pts.size(); ++k) {
            double mid = 0.5 * (to.pts[k] + to.pts[k + 1]);
            if (mid > from.tail_lo && mid < from.tail_hi) d = std::max(d, dist_to(to, mid));
        }
    }
    return d;
}

}  // namespace

double distance_dH(const IntervalPartition& beta, const IntervalPartition& gamma) {
    GapSet a = complement(beta), b = complement(gamma);
    return std::max(directed(a, b), directed(b, a));
}

double distance_dI_enumerate(const IntervalPartition& beta, const IntervalPartition& gamma) {
    if (!beta.marked() || !gamma.marked()) throw std::invalid_argument("distance_dI_enumerate: marks required");
    if (beta.size() > 16 || gamma.size() > 16) throw std::invalid_argument("distance_dI_enumerate: too many blocks");
    const double base = std::abs(*beta.total_diversity - *gamma.total_diversity);
    double best = std::numeric_limits<double>::infinity();
    // pairs chosen so far: running sup of mark gaps and the two mass sums
    auto rec = [&](auto&& self, size_t i0, size_t j0, double gap, double sa, double sb) -> void {
        best = std::min(best, std::max({base, gap, beta.total_mass + sa, gamma.total_mass + sb}));
        for (size_t i = i0; i < beta.size(); ++i) {
            for (size_t j = j0; j < gamma.size(); ++j) {
                double u = beta.blocks[i], v = gamma.blocks[j], d = std::abs(u - v);
                self(self, i + 1, j + 1, std::max(gap, std::abs(beta.marks[i] - gamma.marks[j])), sa + d - u,
                     sb + d - v);
            }
        }
    };
    rec(rec, 0, 0, 0.0, 0.0, 0.0);
    return best;
}

}  // namespace ipd
