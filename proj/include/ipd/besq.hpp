#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ipd/rng.hpp"

namespace ipd {

struct BesqPath {
    int dimension = 0;
    double start = 0;
    double delta = 0;
    std::vector<double> times;
    std::vector<double> values;
    bool absorbed = false;
};

// A spindle is a nonnegative function on [0, zeta]. Values live either on a
// uniform grid (offsets empty) or on explicit knots. Unbroken spindles start
// and end at 0; pieces produced by splitting may not.
struct Spindle {
    double zeta = 0;
    double delta = 0;
    std::vector<double> offsets;
    std::vector<double> values;
    double amplitude = 0;

    double value(double u) const;
    Spindle scaled(double c) const;
    Spindle reversed() const;
};

constexpr double kAbsorbTol = 1e-8;

// One transition of BESQ(dimension) over time t. Dimensions 0, 1, 5 are exact;
// -1 is Euler with step min(delta, x/10).
double besq_step(int dimension, double x, double t, Rng& rng, double delta = 1e-3);
BesqPath besq_path(int dimension, double x, double horizon, double delta, Rng& rng);

// Absorption time of BESQ(-1) from a, exact: (a/2)/Gamma(3/2,1).
double besq_neg1_lifetime(double a, Rng& rng);
// Euler BESQ(-1) from a until x <= kAbsorbTol. Knots are irregular.
Spindle besq_neg1_euler(double a, double delta, Rng& rng);
double besq_neg1_euler_lifetime(double a, double delta, Rng& rng);

// nu_BESQ conditioned on amplitude >= h: BESQ(5) from 0 to h, then BESQ(-1) from h.
Spindle sample_spindle_threshold(double h, double delta, Rng& rng);

double nu_tail_lifetime(double y);
double nu_tail_amplitude(double m);
double nu_levy_density(double x);

// Read-only pool of unit-lifetime spindles on a uniform grid.
class SpindlePool {
public:
    struct Params {
        size_t size = 4096;
        double h = 0.05;
        double delta = 1e-3;
        double zeta_min = 1.0;  // keep candidates with lifetime above this, rescale to 1
        size_t grid = 1001;
        uint64_t seed = 0x5eed;
    };

    explicit SpindlePool(const Params& p);
    static std::shared_ptr<const SpindlePool> shared_default();
    static std::shared_ptr<const SpindlePool> load_or_build(const Params& p);

    size_t size() const { return count_; }
    size_t grid() const { return grid_; }
    // f_k(s) for s in [0, 1]
    double unit_value(size_t k, double s) const {
        double x = s * double(grid_ - 1);
        if (x <= 0) return 0.0;
        size_t i = size_t(x);
        if (i >= grid_ - 1) return 0.0;
        double w = x - double(i);
        const double* f = data_.data() + k * grid_;
        return f[i] + w * (f[i + 1] - f[i]);
    }
    double unit_amplitude(size_t k) const { return amp_[k]; }
    Spindle spindle(size_t k, double zeta) const;
    uint64_t candidates() const { return candidates_; }
    const Params& params() const { return params_; }

private:
    SpindlePool() = default;

    Params params_;
    size_t count_ = 0;
    size_t grid_ = 0;
    uint64_t candidates_ = 0;
    std::vector<double> data_;
    std::vector<double> amp_;
};

Spindle sample_spindle_given_lifetime(double zeta, const SpindlePool& pool, Rng& rng);

}  // namespace ipd
