#include "ipd/crp.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ipd {

void CrpParams::validate() const {
    if (!(alpha >= 0 && alpha < 1)) throw std::invalid_argument("crp: alpha must lie in [0,1)");
    if (!(theta >= 0)) throw std::invalid_argument("crp: theta must be >= 0");
}

int64_t CrpState::customers() const {
    int64_t n = 0;
    for (int64_t m : tables) n += m;
    return n;
}

void CrpState::validate() const {
    params.validate();
    if (ids.size() != tables.size()) throw std::invalid_argument("crp: ids and tables differ in length");
    for (int64_t m : tables)
        if (m < 1) throw std::invalid_argument("crp: table sizes must be >= 1");
}

std::string event_name(CrpEvent e) {
    switch (e) {
        case CrpEvent::Grow: return "grow";
        case CrpEvent::Spawn: return "spawn";
        case CrpEvent::Leave: return "leave";
        case CrpEvent::NewLeft: return "new_left";
    }
    return "?";
}

CrpRates crp_rates(const CrpState& s) {
    CrpRates r;
    double n = double(s.customers());
    double k = double(s.tables.size());
    r.grow = n - s.params.alpha * k;
    r.spawn = s.params.alpha * k;
    r.leave = n;
    r.new_left = s.params.theta;
    return r;
}

namespace {

int64_t next_id(const CrpState& s) {
    int64_t m = -1;
    for (int64_t i : s.ids) m = std::max(m, i);
    return m + 1;
}

}  // namespace

CrpState crp_initial(std::vector<int64_t> sizes, const CrpParams& p) {
    CrpState s;
    s.params = p;
    s.tables = std::move(sizes);
    s.ids.resize(s.tables.size());
    for (size_t i = 0; i < s.ids.size(); ++i) s.ids[i] = int64_t(i);
    s.validate();
    return s;
}

CrpState crp_seating(int64_t n, const CrpParams& p, Rng& rng) {
    p.validate();
    std::vector<int64_t> t;
    for (int64_t c = 0; c < n; ++c) {
        double k = double(t.size());
        double u = rng.uniform() * (double(c) + p.theta);
        double open = p.theta + p.alpha * k;
        if (c == 0 || u < open) {
            t.push_back(1);
            continue;
        }
        u -= open;
        size_t j = 0;
        for (; j + 1 < t.size(); ++j) {
            double w = double(t[j]) - p.alpha;
            if (u < w) break;
            u -= w;
        }
        ++t[j];
    }
    return crp_initial(std::move(t), p);
}

namespace {

// Applies the next event unless it falls after t_limit.
bool advance(CrpState& s, Rng& rng, CrpLog* log, double t_limit) {
    const double a = s.params.alpha;
    double n = double(s.customers());
    double total = 2 * n + s.params.theta;
    if (total <= 0) return false;
    double t = s.clock + rng.exponential(total);
    if (t > t_limit) return false;
    s.clock = t;
    double u = rng.uniform() * total;
    CrpRecord rec;
    rec.time = s.clock;
    if (u < s.params.theta) {
        int64_t id = next_id(s);
        s.tables.insert(s.tables.begin(), 1);
        s.ids.insert(s.ids.begin(), id);
        rec.event = CrpEvent::NewLeft;
        rec.table = 0;
        if (log && log->keep_lineage) log->lineage.push_back({id, -1, s.clock, -1});
    } else {
        u -= s.params.theta;
        size_t i = 0;
        for (; i + 1 < s.tables.size(); ++i) {
            double w = 2.0 * double(s.tables[i]);
            if (u < w) break;
            u -= w;
        }
        double m = double(s.tables[i]);
        if (u < m - a) {
            ++s.tables[i];
            rec.event = CrpEvent::Grow;
            rec.table = int64_t(i);
        } else if (u < m) {
            int64_t id = next_id(s);
            s.tables.insert(s.tables.begin() + int64_t(i) + 1, 1);
            s.ids.insert(s.ids.begin() + int64_t(i) + 1, id);
            rec.event = CrpEvent::Spawn;
            rec.table = int64_t(i) + 1;
            if (log && log->keep_lineage) log->lineage.push_back({id, s.ids[i], s.clock, -1});
        } else {
            rec.event = CrpEvent::Leave;
            rec.table = int64_t(i);
            if (--s.tables[i] == 0) {
                if (log && log->keep_lineage) {
                    for (auto& l : log->lineage)
                        if (l.id == s.ids[i]) l.death = s.clock;
                }
                s.tables.erase(s.tables.begin() + int64_t(i));
                s.ids.erase(s.ids.begin() + int64_t(i));
            }
        }
    }
    if (log && log->keep_events) {
        rec.digest = sizes_digest(s.tables);
        log->events.push_back(rec);
    }
    return true;
}

}  // namespace

bool crp_step(CrpState& s, Rng& rng, CrpLog* log) {
    return advance(s, rng, log, std::numeric_limits<double>::infinity());
}

uint64_t crp_run(CrpState& s, double t_end, Rng& rng, CrpLog* log) {
    if (log && log->keep_lineage && log->lineage.empty()) {
        for (int64_t id : s.ids) log->lineage.push_back({id, -1, s.clock, -1});
    }
    uint64_t count = 0;
    while (advance(s, rng, log, t_end)) ++count;
    s.clock = t_end;
    return count;
}

uint64_t sizes_digest(const std::vector<int64_t>& tables) {
    // FNV-1a over little-endian bytes
    uint64_t h = 0xcbf29ce484222325ull;
    for (int64_t m : tables) {
        uint64_t v = uint64_t(m);
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

std::string crp_csv(const CrpLog& log) {
    std::ostringstream os;
    os << "event_time,event_type,table_index,sizes_digest\n";
    for (const auto& r : log.events) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(r.digest));
        os << fmt17(r.time) << ',' << event_name(r.event) << ',' << r.table << ',' << buf << '\n';
    }
    return os.str();
}

std::string lineage_csv(const CrpLog& log) {
    std::ostringstream os;
    os << "table_id,parent_id,birth,death\n";
    for (const auto& l : log.lineage)
        os << l.id << ',' << l.parent << ',' << fmt17(l.birth) << ',' << (l.death < 0 ? "" : fmt17(l.death)) << '\n';
    return os.str();
}

std::string init_name(CrpInit i) {
    switch (i) {
        case CrpInit::Seating: return "seating";
        case CrpInit::SingleTable: return "single";
        case CrpInit::Singletons: return "singletons";
    }
    return "?";
}

CrpInit parse_init(const std::string& s) {
    if (s == "seating") return CrpInit::Seating;
    if (s == "single") return CrpInit::SingleTable;
    if (s == "singletons") return CrpInit::Singletons;
    throw std::invalid_argument("unknown crp init: " + s);
}

RankedSimplexPoint ranked_sample(int64_t n, const CrpParams& p, double burn_in, Rng& rng, CrpInit init) {
    const Rng base = rng.split();
    for (uint64_t attempt = 0;; ++attempt) {
        Rng r = base.child(attempt);
        CrpState s;
        switch (init) {
            case CrpInit::Seating: s = crp_seating(n, p, r); break;
            case CrpInit::SingleTable: s = crp_initial({n}, p); break;
            case CrpInit::Singletons: s = crp_initial(std::vector<int64_t>(size_t(n), 1), p); break;
        }
        crp_run(s, burn_in, r);
        if (s.tables.empty()) continue;
        std::vector<double> b(s.tables.begin(), s.tables.end());
        return ranked(normalize(make_partition(std::move(b))));
    }
}

double pd_largest_stick_breaking(double alpha, double theta, Rng& rng, double tol) {
    double rest = 1, best = 0;
    for (int i = 1; rest > tol && rest > best; ++i) {
        double v = rng.beta(1 - alpha, theta + i * alpha);
        best = std::max(best, rest * v);
        rest *= 1 - v;
    }
    return best;
}

}  // namespace ipd
