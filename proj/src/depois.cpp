#include "ipd/depois.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ipd/replicas.hpp"

namespace ipd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_sorted(const std::vector<double>& u) {
    for (size_t i = 0; i < u.size(); ++i) {
        if (!(u[i] >= 0)) throw std::invalid_argument("depoissonize: u must be >= 0");
        if (i > 0 && u[i] < u[i - 1]) throw std::invalid_argument("depoissonize: u must be nondecreasing");
    }
}

}  // namespace

std::vector<double> time_change(const std::vector<double>& levels, const std::vector<double>& masses,
                                const std::vector<double>& u) {
    if (levels.size() != masses.size() || levels.empty())
        throw std::invalid_argument("time_change: levels and masses must be nonempty and of equal length");
    require_sorted(u);
    std::vector<double> rho(u.size(), kNaN);
    size_t k = 0;
    while (k < u.size() && u[k] <= 0) rho[k++] = levels.front();
    double acc = 0;
    for (size_t i = 1; i < levels.size() && k < u.size(); ++i) {
        if (!(masses[i - 1] > 0) || !(masses[i] > 0)) break;
        double h = levels[i] - levels[i - 1];
        double cell = h * 0.5 * (1 / masses[i - 1] + 1 / masses[i]);
        while (k < u.size() && u[k] <= acc + cell) {
            double w = (u[k] - acc) / cell;
            rho[k++] = levels[i - 1] + w * h;
        }
        acc += cell;
    }
    return rho;
}

DePoisTrace depoissonize(const EvolutionTrace& trace, const std::vector<double>& u) {
    DePoisTrace out;
    out.u = u;
    out.rho = time_change(trace.levels, trace.mass_series, u);
    for (double r : out.rho) {
        if (std::isnan(r)) {
            out.truncated = true;
            break;
        }
        auto it = std::lower_bound(trace.levels.begin(), trace.levels.end(), r);
        size_t j = size_t(it - trace.levels.begin());
        if (j == trace.levels.size() || (j > 0 && r - trace.levels[j - 1] <= trace.levels[j] - r)) --j;
        out.states.push_back(normalize(trace.states[j]));
    }
    out.rho.resize(out.states.size());
    out.u.resize(out.states.size());
    return out;
}

DePoisTrace depoissonize(PathEvolution& ev, const std::vector<double>& u, const TimeChangeGrid& g) {
    require_sorted(u);
    DePoisTrace out;
    double m0 = ev.masses({0.0}).front();
    std::vector<double> levels{0.0}, masses{m0};
    double umax = u.empty() ? 0.0 : u.back();
    if (m0 > 0 && umax > 0) {
        double h = m0 * std::min(g.step, umax / 32);
        int halvings = 0;
        double acc = 0;
        bool done = false;
        while (!done) {
            std::vector<double> chunk(g.chunk);
            for (size_t i = 0; i < g.chunk; ++i) chunk[i] = levels.back() + h * double(i + 1);
            auto mc = ev.masses(chunk);
            for (size_t i = 0; i < g.chunk; ++i) {
                if (mc[i] < g.refine_below * m0 && halvings < g.max_halvings && mc[i] > 0) {
                    h /= 2;
                    ++halvings;
                    break;
                }
                double mp = masses.back();
                levels.push_back(chunk[i]);
                masses.push_back(mc[i]);
                if (!(mc[i] > 0)) {
                    done = true;
                    break;
                }
                acc += h * 0.5 * (1 / mp + 1 / mc[i]);
                if (acc >= umax) {
                    done = true;
                    break;
                }
            }
        }
    }
    std::vector<double> rho = m0 > 0 ? time_change(levels, masses, u) : std::vector<double>(u.size(), kNaN);
    size_t ok = 0;
    while (ok < rho.size() && !std::isnan(rho[ok])) ++ok;
    out.truncated = ok < rho.size();
    out.u.assign(u.begin(), u.begin() + int64_t(ok));
    out.rho.assign(rho.begin(), rho.begin() + int64_t(ok));
    auto st = ev.states(out.rho);
    for (auto& s : st) out.states.push_back(normalize(s));
    return out;
}

double q_value(int m, const std::vector<double>& x) {
    if (m < 0) throw std::invalid_argument("q_value: m must be >= 0");
    if (m == 0) return 1.0;
    double s = 0;
    for (double v : x) s += std::pow(v, m + 1);
    return s;
}

SymPoly parse_sympoly(const std::string& s) {
    SymPoly q;
    auto star = s.find('*');
    auto one = [](const std::string& t) {
        if (t.size() < 2 || t[0] != 'q') throw std::invalid_argument("unsupported polynomial: " + t);
        return std::stoi(t.substr(1));
    };
    if (star == std::string::npos) {
        q.m = one(s);
    } else {
        q.m = one(s.substr(0, star));
        q.n = one(s.substr(star + 1));
    }
    if (q.m < 0 || (q.n < -1)) throw std::invalid_argument("unsupported polynomial: " + s);
    return q;
}

namespace {

double twice_b_single(int m, const std::vector<double>& x, double alpha, double theta) {
    if (m == 0) return 0.0;
    double c = double(m + 1);
    double qm = q_value(m, x), qm1 = q_value(m - 1, x);
    return 2 * c * m * qm1 - 2 * c * m * qm - 2 * c * (theta * qm + alpha * qm1);
}

}  // namespace

double ekp_generator(const SymPoly& q, const std::vector<double>& x, double alpha, double theta) {
    if (q.m < 0 || q.n < -1) throw std::invalid_argument("ekp_generator: unsupported polynomial");
    if (q.n < 0) return twice_b_single(q.m, x, alpha, theta);
    int m = q.m, n = q.n;
    if (m == 0) return twice_b_single(n, x, alpha, theta);
    if (n == 0) return twice_b_single(m, x, alpha, theta);
    double qm = q_value(m, x), qn = q_value(n, x);
    double carre = 2.0 * (m + 1) * (n + 1) * (q_value(m + n, x) - qm * qn);
    return qm * twice_b_single(n, x, alpha, theta) + qn * twice_b_single(m, x, alpha, theta) + 2 * carre;
}

GeneratorEstimate generator_estimate(const GeneratorCheck& c) {
    if (c.x.empty()) throw std::invalid_argument("generator_check: empty x");
    double theta = c.mode == Mode::Type1 ? 0.0 : 0.5;
    GeneratorEstimate est;
    est.target = ekp_generator(SymPoly{c.m, -1}, c.x, 0.5, theta);
    double q0 = q_value(c.m, c.x);
    IntervalPartition init = make_partition(c.x);
    struct Out {
        double d = 0;
        bool extinct = false;
    };
    auto res = parallel_map(c.replicas, [&](size_t r) {
        PathEvolution ev(init, c.mode, c.evolve, Rng(c.seed, r));
        auto dp = depoissonize(ev, {c.u}, c.grid);
        Out o;
        // f_m vanishes on the empty partition
        double q = 0;
        if (dp.truncated) {
            o.extinct = true;
        } else {
            q = q_value(c.m, ranked(dp.states.front()).values);
        }
        o.d = (q - q0) / c.u;
        return o;
    });
    std::vector<double> d;
    d.reserve(res.size());
    for (auto& o : res) {
        d.push_back(o.d);
        est.extinct += o.extinct;
    }
    auto ms = mean_se(d);
    est.quotient = ms.mean;
    est.se = ms.se;
    return est;
}

StatReport generator_check(const GeneratorCheck& c) {
    auto e = generator_estimate(c);
    std::ostringstream note;
    note << "quotient=" << fmt17(e.quotient) << " target=" << fmt17(e.target) << " se=" << fmt17(e.se)
         << " extinct=" << e.extinct;
    return make_report("ekp-generator/" + mode_name(c.mode) + "/q" + std::to_string(c.m), "abs_error",
                       std::abs(e.quotient - e.target), 3 * e.se + c.bias_budget, c.replicas, c.seed, note.str());
}

std::string depois_csv(const std::vector<DePoisTrace>& traces) {
    std::ostringstream os;
    os << "replica,u,rho,block_index,mass,div_mark\n";
    for (size_t r = 0; r < traces.size(); ++r) {
        const auto& t = traces[r];
        for (size_t k = 0; k < t.states.size(); ++k) {
            const auto& s = t.states[k];
            for (size_t i = 0; i < s.blocks.size(); ++i) {
                os << r << ',' << fmt17(t.u[k]) << ',' << fmt17(t.rho[k]) << ',' << i << ',' << fmt17(s.blocks[i]) << ','
                   << (s.marked() ? fmt17(s.marks[i]) : "") << '\n';
            }
            if (s.dust() > 0)
                os << r << ',' << fmt17(t.u[k]) << ',' << fmt17(t.rho[k]) << ",-1," << fmt17(s.dust()) << ",\n";
        }
    }
    return os.str();
}

}  // namespace ipd
