#pragma once

#include <cstdint>
#include <cstring>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ipd/besq.hpp"
#include "ipd/rng.hpp"

namespace ipd {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Drift of the compensated scaffolding truncated at lifetime z.
double scaffold_drift(double trunc_z);
// Rate of spindles with lifetime > z.
double scaffold_rate(double trunc_z);
// w^{-1/3} by a bit-level first guess and four Newton steps; relative error
// below 1e-11 for w in (0, 1].
inline double inv_cbrt(double w) {
    uint64_t b;
    std::memcpy(&b, &w, sizeof b);
    b = 0x5540000000000000ull - b / 3;
    double y;
    std::memcpy(&y, &b, sizeof y);
    for (int i = 0; i < 4; ++i) y = y * (4.0 - w * y * y * y) * (1.0 / 3.0);
    return y;
}

// Pareto tail draw from the Levy density restricted to (z, inf).
inline double pareto_lifetime(double z, double u) { return z * inv_cbrt(u * u); }

struct SpindleEvent {
    double t = 0;
    double birth = 0;  // X(t-)
    double zeta = 0;   // jump height = spindle lifetime
    double after = 0;  // X(t); birth + zeta unless the path was capped
    int32_t pool = -1;
    int32_t expl = -1;
};

// Piecewise-linear path with upward jumps. Between events the path moves at
// slope `drift`. Spindles come from a shared pool or an explicit list.
struct Scaffolding {
    double initial = 0;
    double trunc_z = 0;
    double drift = 0;
    double horizon = 0;
    std::vector<SpindleEvent> events;
    std::vector<Spindle> explicit_spindles;
    std::shared_ptr<const SpindlePool> pool;

    double value(double t) const;
    // value of the spindle of event e at offset u in [0, zeta]
    double spindle_value(const SpindleEvent& e, double u) const {
        if (e.expl >= 0) return explicit_spindles[size_t(e.expl)].value(u);
        if (u <= 0 || u >= e.zeta) return 0.0;
        return e.zeta * pool->unit_value(size_t(e.pool), u / e.zeta);
    }
    Spindle spindle(const SpindleEvent& e) const;
    double segment_end(size_t k) const {
        return k + 1 < events.size() ? events[k + 1].t : horizon;
    }
};

Scaffolding sample_scaffolding(double horizon, double trunc_z, std::shared_ptr<const SpindlePool> pool, Rng& rng,
                               double initial = 0.0);

double path_value(const Scaffolding& s, double t);
std::optional<double> hitting_time(const Scaffolding& s, double level);
// (1/h) Leb{u <= t : y < X(u) < y + h}, exact on linear pieces.
double local_time(const Scaffolding& s, double y, double t, double h);
// Occupation of the band (lo, hi) by the segment starting at x0 that moves
// at slope `drift` < 0 for duration dt.
double band_occupation(double x0, double drift, double dt, double lo, double hi);

// Streaming samplers that do not keep events.
double sample_increment(double horizon, double trunc_z, Rng& rng);
// First time the path from x0 reaches `level` < x0; kInf if not by t_max.
double first_passage_time(double x0, double level, double trunc_z, double t_max, Rng& rng);
// Time needed to accumulate local time `ell` at the start level 0 (band h);
// kInf if not by t_max.
double inverse_local_time(double ell, double trunc_z, double h, double t_max, Rng& rng);

struct CladeStats {
    double m0 = 0;
    double jplus = 0;
    double jminus = 0;
    double zeta_plus = 0;
    double zeta_minus = 0;
    double len = 0;
    bool degenerate = false;
};

struct BiClade {
    double t_start = 0;
    double t_end = 0;
    size_t first_event = 0;   // first event index inside the piece
    size_t end_event = 0;     // one past the last
    std::optional<size_t> crossing;
    bool complete = false;
    CladeStats stats;
};

std::vector<BiClade> decompose_biclades(const Scaffolding& s, double y);
std::pair<Spindle, Spindle> split_spindle(const Scaffolding& s, const SpindleEvent& e, double y);
CladeStats clade_stats(const Scaffolding& s, const BiClade& b, double y);

// Long run at level 0 for clade statistics. Truncation is trunc_z within
// distance near of the level and grows in proportion to the distance
// beyond, in dyadic zones.
struct CladeRunParams {
    double trunc_z = 1e-4;
    double near = 0.1;
    double lt_band = 1e-3;
    double target_local_time = 1000;
};

struct CladeRun {
    std::vector<CladeStats> clades;
    double local_time = 0;
    double time = 0;
    uint64_t events = 0;
};

CladeRun simulate_clades(const CladeRunParams& p, const SpindlePool& pool, Rng& rng);

std::string scaffolding_csv(const Scaffolding& s);

}  // namespace ipd
