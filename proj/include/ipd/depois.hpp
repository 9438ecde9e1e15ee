#pragma once
#include <string>
#include <vector>

#include "ipd/evolve.hpp"
#include "ipd/interval_partition.hpp"
#include "ipd/stats.hpp"

namespace ipd {

struct DePoisTrace {
    std::vector<double> u;
    std::vector<IntervalPartition> states;  // unit mass
    std::vector<double> rho;
    bool truncated = false;  // mass reached 0 before the last requested u
};

// rho(u) = inf{y : int_0^y dz / mass(z) > u} from a mass series on a level
// grid, trapezoid rule with linear inversion inside the crossing cell.
// Entries past extinction or past the end of the grid are NaN.
std::vector<double> time_change(const std::vector<double>& levels, const std::vector<double>& masses,
                                const std::vector<double>& u);

// States are taken at the simulated level nearest to rho(u).
DePoisTrace depoissonize(const EvolutionTrace& trace, const std::vector<double>& u);

struct TimeChangeGrid {
    double step = 1.0 / 64;  // initial level step, relative to the starting mass
    double refine_below = 0.1;
    int max_halvings = 6;
    size_t chunk = 16;
};

// Integrates 1/mass on an adaptive level grid of a live evolution and reads
// the states exactly at rho(u).
DePoisTrace depoissonize(PathEvolution& ev, const std::vector<double>& u, const TimeChangeGrid& g = {});

// q_m(x) = sum_i x_i^{m+1}; q_0 = 1.
double q_value(int m, const std::vector<double>& x);

// q = q_m, or q_m q_n when n >= 0.
struct SymPoly {
    int m = 1;
    int n = -1;
};
SymPoly parse_sympoly(const std::string& s);  // "q1", "q2*q3"

// 2 B(q)(x) for the EKP(alpha, theta) generator; x must sum to 1.
double ekp_generator(const SymPoly& q, const std::vector<double>& x, double alpha, double theta);

struct GeneratorCheck {
    std::vector<double> x{1.0};
    int m = 1;
    double u = 0.01;
    size_t replicas = 100000;
    Mode mode = Mode::Type1;
    EvolveParams evolve;
    TimeChangeGrid grid;
    double bias_budget = 0.1;
    uint64_t seed = 1;
};

struct GeneratorEstimate {
    double quotient = 0;
    double se = 0;
    double target = 0;
    size_t extinct = 0;
};

GeneratorEstimate generator_estimate(const GeneratorCheck& c);
StatReport generator_check(const GeneratorCheck& c);

std::string depois_csv(const std::vector<DePoisTrace>& traces);

}  // namespace ipd
