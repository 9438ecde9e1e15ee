#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "ipd/interval_partition.hpp"
#include "ipd/rng.hpp"

namespace ipd {

struct CrpParams {
    double alpha = 0.5;
    double theta = 0.0;
    void validate() const;
};

struct CrpState {
    std::vector<int64_t> tables;  // left to right, all >= 1
    std::vector<int64_t> ids;     // genealogy ids, parallel to tables
    CrpParams params;
    double clock = 0;
    int64_t customers() const;
    void validate() const;
};

enum class CrpEvent { Grow, Spawn, Leave, NewLeft };
std::string event_name(CrpEvent e);

// Per-event rates of a state; total() == 2 n + theta.
struct CrpRates {
    double grow = 0;
    double spawn = 0;
    double leave = 0;
    double new_left = 0;
    double total() const { return grow + spawn + leave + new_left; }
};
CrpRates crp_rates(const CrpState& s);

struct CrpRecord {
    double time = 0;
    CrpEvent event = CrpEvent::Grow;
    int64_t table = 0;  // index acted on; for Spawn, index of the new table
    uint64_t digest = 0;
};

// Birth/death of each table; parent is the table it was spawned next to, -1
// for tables entering at the left.
struct TableLineage {
    int64_t id = 0;
    int64_t parent = -1;
    double birth = 0;
    double death = -1;
};

struct CrpLog {
    std::vector<CrpRecord> events;
    std::vector<TableLineage> lineage;
    bool keep_events = true;
    bool keep_lineage = false;
};

CrpState crp_initial(std::vector<int64_t> sizes, const CrpParams& p);
// Sequential CRP(alpha, theta) seating of n customers; new tables at the right.
CrpState crp_seating(int64_t n, const CrpParams& p, Rng& rng);

// One event. Returns false when no event is possible (empty and theta = 0).
bool crp_step(CrpState& s, Rng& rng, CrpLog* log = nullptr);
// Events until the clock passes t_end; the state at t_end is returned in s.
uint64_t crp_run(CrpState& s, double t_end, Rng& rng, CrpLog* log = nullptr);

uint64_t sizes_digest(const std::vector<int64_t>& tables);
std::string crp_csv(const CrpLog& log);
std::string lineage_csv(const CrpLog& log);

enum class CrpInit { Seating, SingleTable, Singletons };
std::string init_name(CrpInit i);
CrpInit parse_init(const std::string& s);

// Normalized ranked table sizes after burn_in time units, started from the
// given initial composition of n customers; restarts if the chain empties.
RankedSimplexPoint ranked_sample(int64_t n, const CrpParams& p, double burn_in, Rng& rng,
                                 CrpInit init = CrpInit::Seating);

// Largest part of PD(alpha, theta) by stick-breaking.
double pd_largest_stick_breaking(double alpha, double theta, Rng& rng, double tol = 1e-12);

}  // namespace ipd
