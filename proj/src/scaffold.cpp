#include "ipd/scaffold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ipd/interval_partition.hpp"

namespace ipd {

double scaffold_drift(double trunc_z) { return -3.0 / (M_PI * std::sqrt(2.0)) / std::sqrt(trunc_z); }
double scaffold_rate(double trunc_z) { return nu_tail_lifetime(trunc_z); }

double Scaffolding::value(double t) const { return path_value(*this, t); }

Spindle Scaffolding::spindle(const SpindleEvent& e) const {
    if (e.expl >= 0) return explicit_spindles[size_t(e.expl)];
    return pool->spindle(size_t(e.pool), e.zeta);
}

Scaffolding sample_scaffolding(double horizon, double trunc_z, std::shared_ptr<const SpindlePool> pool, Rng& rng,
                               double initial) {
    if (!(horizon >= 0) || !(trunc_z > 0)) throw std::invalid_argument("sample_scaffolding: bad arguments");
    if (!pool || pool->size() == 0) throw std::invalid_argument("sample_scaffolding: empty spindle pool");
    Scaffolding s;
    s.initial = initial;
    s.trunc_z = trunc_z;
    s.drift = scaffold_drift(trunc_z);
    s.horizon = horizon;
    s.pool = pool;
    const double rate = scaffold_rate(trunc_z);
    double t = 0, x = initial;
    while (true) {
        double gap = rng.exponential(rate);
        if (t + gap > horizon) break;
        t += gap;
        x += s.drift * gap;
        SpindleEvent e;
        e.t = t;
        e.birth = x;
        e.zeta = pareto_lifetime(trunc_z, rng.uniform());
        e.after = x + e.zeta;
        e.pool = int32_t(rng.below(pool->size()));
        s.events.push_back(e);
        x = e.after;
    }
    return s;
}

double path_value(const Scaffolding& s, double t) {
    if (t < 0 || t > s.horizon) throw std::out_of_range("path_value: t out of range");
    auto it = std::upper_bound(s.events.begin(), s.events.end(), t,
                               [](double v, const SpindleEvent& e) { return v < e.t; });
    if (it == s.events.begin()) return s.initial + s.drift * t;
    --it;
    return it->after + s.drift * (t - it->t);
}

std::optional<double> hitting_time(const Scaffolding& s, double level) {
    double x = s.initial, t0 = 0;
    for (size_t k = 0; k <= s.events.size(); ++k) {
        if (x <= level) return t0;
        double t1 = k < s.events.size() ? s.events[k].t : s.horizon;
        double hit = t0 + (x - level) / -s.drift;
        if (hit <= t1) return hit;
        if (k < s.events.size()) {
            x = s.events[k].after;
            t0 = s.events[k].t;
        }
    }
    return std::nullopt;
}

double band_occupation(double x0, double drift, double dt, double lo, double hi) {
    if (dt <= 0) return 0.0;
    double x1 = x0 + drift * dt;
    double top = std::min(x0, hi), bot = std::max(x1, lo);
    if (top <= bot) return 0.0;
    return (top - bot) / -drift;
}

double local_time(const Scaffolding& s, double y, double t, double h) {
    if (!(h > 0)) throw std::invalid_argument("local_time: h must be > 0");
    t = std::min(t, s.horizon);
    double occ = 0, x = s.initial, t0 = 0;
    for (size_t k = 0; k <= s.events.size() && t0 < t; ++k) {
        double t1 = std::min(t, k < s.events.size() ? s.events[k].t : s.horizon);
        occ += band_occupation(x, s.drift, t1 - t0, y, y + h);
        if (k < s.events.size()) {
            x = s.events[k].after;
            t0 = s.events[k].t;
        }
    }
    return occ / h;
}

double sample_increment(double horizon, double trunc_z, Rng& rng) {
    const double rate = scaffold_rate(trunc_z);
    uint64_t n = rng.poisson(rate * horizon);
    long double sum = 0;
    for (uint64_t i = 0; i < n; ++i) sum += pareto_lifetime(trunc_z, rng.uniform());
    return double(sum) + scaffold_drift(trunc_z) * horizon;
}

double first_passage_time(double x0, double level, double trunc_z, double t_max, Rng& rng) {
    const double rate = scaffold_rate(trunc_z), speed = -scaffold_drift(trunc_z);
    double t = 0, x = x0;
    // Before the first jump of a window of length (x - level)/speed the path
    // only descends, and it reaches the level at the end of the window exactly
    // when the window has no jump. Jump times inside a window do not matter.
    while (true) {
        double window = (x - level) / speed;
        if (t + window > t_max) return kInf;
        uint64_t n = rng.poisson(rate * window);
        t += window;
        if (n == 0) return t;
        double sum = 0;
        for (uint64_t i = 0; i < n; ++i) sum += pareto_lifetime(trunc_z, rng.uniform());
        x = level + sum;
    }
}

double inverse_local_time(double ell, double trunc_z, double h, double t_max, Rng& rng) {
    const double rate = scaffold_rate(trunc_z), drift = scaffold_drift(trunc_z);
    double t = 0, x = 0, occ = 0;
    const double need = ell * h;
    while (true) {
        double gap = rng.exponential(rate);
        double o = band_occupation(x, drift, gap, 0, h);
        if (occ + o >= need) {
            // solve for the time inside this segment where occupation reaches need
            double entry = std::max(0.0, (x - h) / -drift);
            return t + entry + (need - occ);
        }
        occ += o;
        t += gap;
        if (t > t_max) return kInf;
        x += drift * gap + pareto_lifetime(trunc_z, rng.uniform());
    }
}

std::vector<BiClade> decompose_biclades(const Scaffolding& s, double y) {
    // downcrossing times of y
    std::vector<std::pair<double, size_t>> cuts;  // (time, index of first event after)
    double x = s.initial, t0 = 0;
    if (x == y) cuts.push_back({0.0, 0});
    for (size_t k = 0; k <= s.events.size(); ++k) {
        double t1 = k < s.events.size() ? s.events[k].t : s.horizon;
        if (x > y) {
            double hit = t0 + (x - y) / -s.drift;
            if (hit <= t1) cuts.push_back({hit, k});
        }
        if (k < s.events.size()) {
            x = s.events[k].after;
            t0 = s.events[k].t;
        }
    }
    std::vector<BiClade> out;
    auto make = [&](double ta, size_t ea, double tb, size_t eb, bool complete) {
        BiClade b;
        b.t_start = ta;
        b.t_end = tb;
        b.first_event = ea;
        b.end_event = eb;
        b.complete = complete;
        for (size_t k = ea; k < eb; ++k)
            if (s.events[k].birth < y && s.events[k].after > y) {
                b.crossing = k;
                break;
            }
        if (complete) b.stats = clade_stats(s, b, y);
        out.push_back(b);
    };
    if (cuts.empty()) {
        make(0, 0, s.horizon, s.events.size(), false);
        return out;
    }
    if (cuts.front().first > 0) make(0, 0, cuts.front().first, cuts.front().second, false);
    for (size_t i = 0; i + 1 < cuts.size(); ++i)
        make(cuts[i].first, cuts[i].second, cuts[i + 1].first, cuts[i + 1].second, true);
    make(cuts.back().first, cuts.back().second, s.horizon, s.events.size(), false);
    return out;
}

CladeStats clade_stats(const Scaffolding& s, const BiClade& b, double y) {
    CladeStats c;
    c.len = b.t_end - b.t_start;
    if (!b.crossing) {
        c.degenerate = true;
        return c;
    }
    const SpindleEvent& e = s.events[*b.crossing];
    c.m0 = s.spindle_value(e, y - e.birth);
    c.jplus = e.after - y;
    c.jminus = y - e.birth;
    double lo = e.birth, hi = e.after;
    for (size_t k = b.first_event; k < b.end_event; ++k) {
        if (k <= *b.crossing)
            lo = std::min(lo, s.events[k].birth);
        else
            hi = std::max(hi, s.events[k].after);
    }
    c.zeta_plus = hi - y;
    c.zeta_minus = y - lo;
    return c;
}

std::pair<Spindle, Spindle> split_spindle(const Scaffolding& s, const SpindleEvent& e, double y) {
    if (!(y > e.birth && y < e.birth + e.zeta)) throw std::invalid_argument("split_spindle: level outside the jump");
    Spindle f = s.spindle(e);
    const double cut = y - e.birth;
    const double at = f.value(cut);
    Spindle lower, upper;
    lower.delta = upper.delta = f.delta;
    std::vector<double> off;
    if (f.offsets.empty()) {
        for (size_t i = 0; i < f.values.size(); ++i) off.push_back(std::min(f.zeta, double(i) * f.delta));
    } else {
        off = f.offsets;
    }
    for (size_t i = 0; i < off.size() && off[i] < cut; ++i) {
        lower.offsets.push_back(off[i]);
        lower.values.push_back(f.values[i]);
    }
    lower.offsets.push_back(cut);
    lower.values.push_back(at);
    lower.zeta = cut;
    upper.offsets.push_back(0);
    upper.values.push_back(at);
    for (size_t i = 0; i < off.size(); ++i)
        if (off[i] > cut) {
            upper.offsets.push_back(off[i] - cut);
            upper.values.push_back(f.values[i]);
        }
    upper.zeta = f.zeta - cut;
    lower.amplitude = *std::max_element(lower.values.begin(), lower.values.end());
    upper.amplitude = *std::max_element(upper.values.begin(), upper.values.end());
    return {lower, upper};
}

namespace {

// Dyadic truncation zones around level 0, see CladeRunParams.
struct Zone {
    int k = 0;     // 0 is the central zone
    int side = 0;  // +1 above, -1 below
    double lo = 0, z = 0, rate = 0, drift = 0;
};

Zone make_zone(int k, int side, const CladeRunParams& p) {
    Zone zn;
    zn.k = k;
    zn.side = side;
    if (k == 0) {
        zn.lo = -p.near;
        zn.z = p.trunc_z;
    } else {
        double scale = std::ldexp(1.0, k - 1);
        zn.z = p.trunc_z * scale;
        zn.lo = side > 0 ? p.near * scale : -p.near * 2 * scale;
    }
    zn.rate = scaffold_rate(zn.z);
    zn.drift = scaffold_drift(zn.z);
    return zn;
}

Zone zone_of(double x, const CladeRunParams& p) {
    if (x > -p.near && x <= p.near) return make_zone(0, 0, p);
    int k = 1;
    if (x > 0) {
        while (p.near * std::ldexp(1.0, k) < x) ++k;
        return make_zone(k, 1, p);
    }
    while (p.near * std::ldexp(1.0, k) <= -x) ++k;
    return make_zone(k, -1, p);
}

Zone zone_below(const Zone& z, const CladeRunParams& p) {
    if (z.k == 0) return make_zone(1, -1, p);
    if (z.side > 0) return z.k == 1 ? make_zone(0, 0, p) : make_zone(z.k - 1, 1, p);
    return make_zone(z.k + 1, -1, p);
}

}  // namespace

CladeRun simulate_clades(const CladeRunParams& p, const SpindlePool& pool, Rng& rng) {
    CladeRun run;
    const double h = p.lt_band;
    if (h >= p.near) throw std::invalid_argument("simulate_clades: band must sit inside the central zone");
    double t = 0, x = 0, occ = 0;
    Zone zn = make_zone(0, 0, p);
    double t_start = 0;
    bool crossed = false;
    CladeStats cur;
    double lo = 0, hi = 0;
    auto reset = [&](double ts) {
        t_start = ts;
        crossed = false;
        cur = CladeStats{};
        lo = 0;
        hi = 0;
    };
    reset(0);
    while (true) {
        double gap = rng.exponential(zn.rate);
        double speed = -zn.drift;
        double to_lo = (x - zn.lo) / speed;
        double step = std::min(gap, to_lo);
        if (zn.k == 0) occ += band_occupation(x, zn.drift, step, 0, h);
        if (x > 0 && x - speed * step <= 0) {
            // downcrossing of the level closes the current bi-clade
            double tc = t + x / speed;
            if (crossed) {
                cur.len = tc - t_start;
                cur.zeta_minus = -lo;
                cur.zeta_plus = hi;
                run.clades.push_back(cur);
            }
            reset(tc);
            if (occ / h >= p.target_local_time) {
                run.time = tc;
                break;
            }
        }
        t += step;
        if (gap < to_lo) {
            x += zn.drift * gap;
            double zeta = pareto_lifetime(zn.z, rng.uniform());
            ++run.events;
            if (!crossed) lo = std::min(lo, x);
            if (x < 0 && x + zeta > 0) {
                crossed = true;
                size_t idx = rng.below(pool.size());
                cur.jminus = -x;
                cur.jplus = x + zeta;
                cur.m0 = zeta * pool.unit_value(idx, -x / zeta);
                hi = x + zeta;
            } else if (crossed) {
                hi = std::max(hi, x + zeta);
            }
            x += zeta;
            zn = zone_of(x, p);
        } else {
            x = zn.lo;
            zn = zone_below(zn, p);
        }
    }
    run.local_time = occ / h;
    return run;
}

std::string scaffolding_csv(const Scaffolding& s) {
    std::ostringstream os;
    os << "t,x_before,x_after,spindle_id\n";
    for (size_t k = 0; k < s.events.size(); ++k) {
        const auto& e = s.events[k];
        os << fmt17(e.t) << ',' << fmt17(e.birth) << ',' << fmt17(e.after) << ',' << k << '\n';
    }
    return os.str();
}

}  // namespace ipd
