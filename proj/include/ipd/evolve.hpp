#pragma once

#include <iosfwd>

#include <memory>
#include <string>
#include <vector>

#include "ipd/interval_partition.hpp"
#include "ipd/scaffold.hpp"

namespace ipd {

enum class Mode { Type1, Type0 };
std::string mode_name(Mode m);
Mode parse_mode(const std::string& s);

struct EvolveParams {
    double trunc_z = 1e-4;
    double lead_delta = 1e-3;
    double lt_band = 1e-3;
    double mass_floor = 1e-9;
    double stage = 0.5;       // level span simulated per restart
    double dust_grid = 0.0025;
    bool dust_correction = true;
};

// Expected skewer mass per unit local time carried by spindles of lifetime < z.
double truncation_dust_rate(double trunc_z);

// Block i of the initial state: lead spindle (Euler BESQ(-1)) followed by a
// scaffolding from its lifetime down to 0. Immigration for type 0 is a
// scaffolding from the ceiling down to 0. The path is capped at the ceiling,
// which leaves every level below it untouched.
Scaffolding build_clade(double a, double ceiling, const EvolveParams& p, std::shared_ptr<const SpindlePool> pool,
                        Rng& rng);
Scaffolding build_immigration(double ceiling, const EvolveParams& p, std::shared_ptr<const SpindlePool> pool,
                              Rng& rng);

struct SkewerOptions {
    bool blocks = true;  // false: masses and local times only
};

// Skewer a left-to-right sequence of scaffoldings at sorted levels. Marks are
// the band local time accumulated before each block.
std::vector<IntervalPartition> skewer_pieces(const std::vector<const Scaffolding*>& pieces,
                                             const std::vector<double>& levels, const EvolveParams& p,
                                             SkewerOptions opt = {});
IntervalPartition skewer(const Scaffolding& s, double y, const EvolveParams& p = {});

class PathEvolution {
public:
    PathEvolution(IntervalPartition initial, Mode mode, EvolveParams p, Rng rng,
                  std::shared_ptr<const SpindlePool> pool = SpindlePool::shared_default());

    // levels must be nondecreasing
    std::vector<IntervalPartition> states(const std::vector<double>& levels, SkewerOptions opt = {});
    IntervalPartition state(double y);
    std::vector<double> masses(const std::vector<double>& levels);

    Mode mode() const { return mode_; }
    const EvolveParams& params() const { return params_; }
    size_t stages_built() const { return stages_.size(); }
    uint64_t events() const;

private:
    struct Stage {
        double y0 = 0;
        std::vector<Scaffolding> pieces;
        std::vector<double> dust_grid;  // BESQ(0) from the carried dust, spacing params.dust_grid
        double dust_at(double local, double step) const;
    };
    void build_next();
    std::vector<IntervalPartition> stage_states(const Stage& st, const std::vector<double>& local,
                                                SkewerOptions opt) const;

    IntervalPartition initial_;
    Mode mode_;
    EvolveParams params_;
    Rng rng_;
    std::shared_ptr<const SpindlePool> pool_;
    std::vector<Stage> stages_;
    IntervalPartition carry_;
};

struct EvolutionTrace {
    Mode mode = Mode::Type1;
    std::vector<double> levels;
    std::vector<IntervalPartition> states;
    std::vector<double> mass_series;
    EvolveParams params;
    uint64_t seed = 0;
};

EvolutionTrace evolve(const IntervalPartition& beta, Mode mode, const std::vector<double>& levels,
                      const EvolveParams& p, Rng& rng);

std::string trace_csv(const std::vector<EvolutionTrace>& traces);
// Inverse of trace_csv for the states, levels and mass series; replicas are
// renumbered in order of first appearance.
std::vector<EvolutionTrace> traces_from_csv(std::istream& in);

}  // namespace ipd
