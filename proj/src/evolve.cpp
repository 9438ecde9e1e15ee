#include "ipd/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ipd {

std::string mode_name(Mode m) { return m == Mode::Type1 ? "type1" : "type0"; }

Mode parse_mode(const std::string& s) {
    if (s == "type1" || s == "1") return Mode::Type1;
    if (s == "type0" || s == "0") return Mode::Type0;
    throw std::invalid_argument("unknown mode: " + s);
}

double truncation_dust_rate(double trunc_z) { return 1.25 * std::sqrt(2.0) / M_PI * std::sqrt(trunc_z); }

namespace {

// Scaffolding from x down to 0, capped at the ceiling. Appends events after
// time t0 and sets the horizon to the hitting time of 0.
void run_to_zero(Scaffolding& s, double x, double t, double ceiling, Rng& rng) {
    const double rate = scaffold_rate(s.trunc_z), speed = -s.drift;
    const size_t n = s.pool->size();
    while (true) {
        double gap = rng.exponential(rate);
        double reach = x / speed;
        if (reach <= gap) {
            s.horizon = t + reach;
            return;
        }
        t += gap;
        x -= speed * gap;
        SpindleEvent e;
        e.t = t;
        e.birth = x;
        e.zeta = pareto_lifetime(s.trunc_z, rng.uniform());
        e.after = std::min(x + e.zeta, ceiling);
        e.pool = int32_t(rng.below(n));
        s.events.push_back(e);
        x = e.after;
    }
}

Scaffolding empty_scaffolding(const EvolveParams& p, std::shared_ptr<const SpindlePool> pool) {
    Scaffolding s;
    s.trunc_z = p.trunc_z;
    s.drift = scaffold_drift(p.trunc_z);
    s.pool = std::move(pool);
    return s;
}

}  // namespace

Scaffolding build_clade(double a, double ceiling, const EvolveParams& p, std::shared_ptr<const SpindlePool> pool,
                        Rng& rng) {
    if (!(a > 0)) throw std::invalid_argument("build_clade: block mass must be > 0");
    Scaffolding s = empty_scaffolding(p, std::move(pool));
    const Rng base = rng.split();
    Rng lead_rng = base.child(0);
    Spindle lead;
    lead.delta = p.lead_delta;
    lead.offsets.push_back(0);
    lead.values.push_back(a);
    double t = 0, x = a;
    while (x > kAbsorbTol && t < ceiling) {
        double dt = std::min(p.lead_delta, x / 10);
        x += -dt + 2.0 * std::sqrt(x * dt) * lead_rng.normal();
        t += dt;
        if (x <= kAbsorbTol) x = 0;
        lead.offsets.push_back(t);
        lead.values.push_back(x);
    }
    lead.zeta = t;
    if (x > 0) {
        // remaining lifetime from the value at the ceiling is exact
        lead.zeta = t + besq_neg1_lifetime(x, lead_rng);
        lead.offsets.push_back(lead.zeta);
        lead.values.push_back(0);
    }
    lead.amplitude = *std::max_element(lead.values.begin(), lead.values.end());
    SpindleEvent e;
    e.t = 0;
    e.birth = 0;
    e.zeta = lead.zeta;
    e.after = std::min(lead.zeta, ceiling);
    e.expl = 0;
    s.explicit_spindles.push_back(std::move(lead));
    s.events.push_back(e);
    Rng path_rng = base.child(1);
    run_to_zero(s, e.after, 0, ceiling, path_rng);
    return s;
}

Scaffolding build_immigration(double ceiling, const EvolveParams& p, std::shared_ptr<const SpindlePool> pool,
                              Rng& rng) {
    Scaffolding s = empty_scaffolding(p, std::move(pool));
    s.initial = ceiling;
    run_to_zero(s, ceiling, 0, ceiling, rng);
    return s;
}

std::vector<IntervalPartition> skewer_pieces(const std::vector<const Scaffolding*>& pieces,
                                             const std::vector<double>& levels, const EvolveParams& p,
                                             SkewerOptions opt) {
    const size_t n = levels.size();
    for (size_t i = 1; i < n; ++i)
        if (levels[i] < levels[i - 1]) throw std::invalid_argument("skewer: levels must be sorted");
    const double h = p.lt_band;
    std::vector<double> occ(n, 0.0), dust(n, 0.0), bsum(n, 0.0);
    std::vector<IntervalPartition> out(n);
    double kappa = 0;
    for (const Scaffolding* sp : pieces) {
        const Scaffolding& s = *sp;
        kappa = truncation_dust_rate(s.trunc_z);
        const double drift = s.drift;
        double x = s.initial, t0 = 0;
        for (size_t k = 0; k <= s.events.size(); ++k) {
            double t1 = k < s.events.size() ? s.events[k].t : s.horizon;
            double dt = t1 - t0;
            if (dt > 0) {
                double xe = x + drift * dt;
                auto it = std::upper_bound(levels.begin(), levels.end(), xe - h);
                for (; it != levels.end() && *it < x; ++it) {
                    size_t i = size_t(it - levels.begin());
                    occ[i] += band_occupation(x, drift, dt, *it, *it + h);
                }
            }
            if (k == s.events.size()) break;
            const SpindleEvent& e = s.events[k];
            double top = e.birth + e.zeta;
            auto it = std::lower_bound(levels.begin(), levels.end(), e.birth);
            for (; it != levels.end() && *it < top; ++it) {
                size_t i = size_t(it - levels.begin());
                double m = s.spindle_value(e, *it - e.birth);
                if (m > p.mass_floor) {
                    bsum[i] += m;
                    if (opt.blocks) {
                        out[i].blocks.push_back(m);
                        out[i].marks.push_back(occ[i] / h);
                    }
                } else if (m > 0) {
                    dust[i] += m;
                }
            }
            x = e.after;
            t0 = e.t;
        }
    }
    for (size_t i = 0; i < n; ++i) {
        double lt = occ[i] / h;
        double extra = dust[i] + (p.dust_correction ? lt * kappa : 0.0);
        out[i].total_mass = bsum[i] + extra;
        out[i].total_diversity = lt;
        if (!opt.blocks) out[i].marks.clear();
    }
    return out;
}

IntervalPartition skewer(const Scaffolding& s, double y, const EvolveParams& p) {
    return skewer_pieces({&s}, {y}, p).front();
}

double PathEvolution::Stage::dust_at(double local, double step) const {
    if (dust_grid.empty()) return 0.0;
    double x = local / step;
    size_t i = size_t(std::floor(x));
    if (i + 1 >= dust_grid.size()) return dust_grid.back();
    double w = x - double(i);
    return dust_grid[i] + w * (dust_grid[i + 1] - dust_grid[i]);
}

PathEvolution::PathEvolution(IntervalPartition initial, Mode mode, EvolveParams p, Rng rng,
                             std::shared_ptr<const SpindlePool> pool)
    : initial_(std::move(initial)), mode_(mode), params_(p), rng_(rng), pool_(std::move(pool)) {
    initial_.validate();
    if (!(p.stage > 0) || !(p.trunc_z > 0) || !(p.lt_band > 0) || !(p.dust_grid > 0))
        throw std::invalid_argument("PathEvolution: bad parameters");
    carry_ = initial_;
}

uint64_t PathEvolution::events() const {
    uint64_t n = 0;
    for (const auto& st : stages_)
        for (const auto& s : st.pieces) n += s.events.size();
    return n;
}

void PathEvolution::build_next() {
    const size_t idx = stages_.size();
    const double L = params_.stage;
    const double ceiling = L + 2 * params_.lt_band;
    Rng srng = rng_.child(idx);
    Stage st;
    st.y0 = double(idx) * L;
    if (mode_ == Mode::Type0) {
        Rng r = srng.child(0);
        st.pieces.push_back(build_immigration(ceiling, params_, pool_, r));
    }
    for (size_t i = 0; i < carry_.blocks.size(); ++i) {
        Rng r = srng.child(i + 1);
        st.pieces.push_back(build_clade(carry_.blocks[i], ceiling, params_, pool_, r));
    }
    double d = std::max(0.0, carry_.dust());
    if (d > 0) {
        Rng r = srng.child(~uint64_t(0));
        size_t steps = size_t(std::ceil(L / params_.dust_grid)) + 1;
        st.dust_grid.push_back(d);
        for (size_t k = 0; k < steps; ++k) {
            d = d > 0 ? besq_step(0, d, params_.dust_grid, r) : 0.0;
            st.dust_grid.push_back(d);
        }
    }
    stages_.push_back(std::move(st));
    carry_ = stage_states(stages_.back(), {L}, {}).front();
    carry_.marks.clear();
    carry_.total_diversity.reset();
}

std::vector<IntervalPartition> PathEvolution::stage_states(const Stage& st, const std::vector<double>& local,
                                                           SkewerOptions opt) const {
    std::vector<const Scaffolding*> ptr;
    for (const auto& s : st.pieces) ptr.push_back(&s);
    auto out = skewer_pieces(ptr, local, params_, opt);
    for (size_t i = 0; i < local.size(); ++i) out[i].total_mass += st.dust_at(local[i], params_.dust_grid);
    return out;
}

std::vector<IntervalPartition> PathEvolution::states(const std::vector<double>& levels, SkewerOptions opt) {
    std::vector<IntervalPartition> out(levels.size());
    const double L = params_.stage;
    size_t i = 0;
    while (i < levels.size()) {
        if (levels[i] < 0) throw std::invalid_argument("PathEvolution: negative level");
        if (i > 0 && levels[i] < levels[i - 1]) throw std::invalid_argument("PathEvolution: levels must be sorted");
        size_t s = size_t(std::floor(levels[i] / L));
        while (stages_.size() <= s) build_next();
        std::vector<double> local;
        size_t j = i;
        while (j < levels.size() && size_t(std::floor(levels[j] / L)) == s) {
            local.push_back(std::max(0.0, levels[j] - stages_[s].y0));
            ++j;
        }
        auto part = stage_states(stages_[s], local, opt);
        for (size_t k = 0; k < part.size(); ++k) out[i + k] = std::move(part[k]);
        i = j;
    }
    return out;
}

IntervalPartition PathEvolution::state(double y) { return states({y}).front(); }

std::vector<double> PathEvolution::masses(const std::vector<double>& levels) {
    auto st = states(levels, SkewerOptions{false});
    std::vector<double> m;
    m.reserve(st.size());
    for (const auto& p : st) m.push_back(p.total_mass);
    return m;
}

EvolutionTrace evolve(const IntervalPartition& beta, Mode mode, const std::vector<double>& levels,
                      const EvolveParams& p, Rng& rng) {
    for (size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i] > levels[i - 1])) throw std::invalid_argument("evolve: levels must be strictly increasing");
    EvolutionTrace tr;
    tr.mode = mode;
    tr.levels = levels;
    tr.params = p;
    tr.seed = rng.seed();
    PathEvolution ev(beta, mode, p, rng.split());
    tr.states = ev.states(levels);
    for (const auto& s : tr.states) tr.mass_series.push_back(s.total_mass);
    return tr;
}

std::string trace_csv(const std::vector<EvolutionTrace>& traces) {
    std::ostringstream os;
    os << "replica,level,block_index,mass,div_mark\n";
    for (size_t r = 0; r < traces.size(); ++r) {
        const auto& tr = traces[r];
        for (size_t l = 0; l < tr.levels.size(); ++l) {
            const auto& st = tr.states[l];
            for (size_t b = 0; b < st.blocks.size(); ++b) {
                os << r << ',' << fmt17(tr.levels[l]) << ',' << b << ',' << fmt17(st.blocks[b]) << ',';
                if (st.marked()) os << fmt17(st.marks[b]);
                os << '\n';
            }
            // dust row keeps the total mass recoverable
            os << r << ',' << fmt17(tr.levels[l]) << ",-1," << fmt17(st.dust()) << ','
               << (st.total_diversity ? fmt17(*st.total_diversity) : std::string()) << '\n';
        }
    }
    return os.str();
}

namespace {

struct Row {
    std::string replica;
    double level = 0;
    long index = 0;
    double mass = 0;
    std::optional<double> mark;
};

double parse_field(const std::string& f, size_t line) {
    size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(f, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != f.size()) throw std::invalid_argument("trace csv line " + std::to_string(line) + ": bad number '" + f + "'");
    return v;
}

}  // namespace

std::vector<EvolutionTrace> traces_from_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "replica,level,block_index,mass,div_mark")
        throw std::invalid_argument("trace csv: expected header replica,level,block_index,mass,div_mark");
    std::vector<EvolutionTrace> out;
    std::string cur_rep;
    std::vector<double> blocks, marks;
    bool open_level = false;
    size_t ln = 1;
    auto begin_replica = [&](const std::string& rep) {
        out.emplace_back();
        cur_rep = rep;
    };
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (line.back() == ',') f.emplace_back();
        if (f.size() != 5) throw std::invalid_argument("trace csv line " + std::to_string(ln) + ": expected 5 fields");
        Row r;
        r.replica = f[0];
        r.level = parse_field(f[1], ln);
        r.index = long(parse_field(f[2], ln));
        r.mass = parse_field(f[3], ln);
        if (!f[4].empty()) r.mark = parse_field(f[4], ln);
        if (out.empty() || r.replica != cur_rep) {
            if (open_level) throw std::invalid_argument("trace csv line " + std::to_string(ln) + ": missing dust row");
            begin_replica(r.replica);
        }
        auto& tr = out.back();
        if (r.index >= 0) {
            if (r.index != long(blocks.size()))
                throw std::invalid_argument("trace csv line " + std::to_string(ln) + ": block indices out of order");
            blocks.push_back(r.mass);
            if (r.mark) marks.push_back(*r.mark);
            open_level = true;
            continue;
        }
        // dust row closes the level
        if (!tr.levels.empty() && !(r.level > tr.levels.back()))
            throw std::invalid_argument("trace csv line " + std::to_string(ln) + ": levels must increase");
        double total = r.mass;
        for (double b : blocks) total += b;
        IntervalPartition p = r.mark && marks.size() == blocks.size()
                                  ? make_marked(blocks, marks, *r.mark, total)
                                  : make_partition(blocks, total);
        tr.levels.push_back(r.level);
        tr.mass_series.push_back(total);
        tr.states.push_back(std::move(p));
        blocks.clear();
        marks.clear();
        open_level = false;
    }
    if (open_level) throw std::invalid_argument("trace csv: missing final dust row");
    return out;
}

}  // namespace ipd
