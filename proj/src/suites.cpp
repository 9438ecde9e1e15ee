#include "ipd/suites.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ipd/besq.hpp"
#include "ipd/crp.hpp"
#include "ipd/depois.hpp"
#include "ipd/metrics.hpp"
#include "ipd/numeric.hpp"
#include "ipd/replicas.hpp"
#include "ipd/scaffold.hpp"

namespace ipd {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Sub-experiment stream tags; replica r of tag k uses Rng(seed, k).child(r).
enum Tag : uint64_t {
    kAbsorbEuler = 1,
    kAbsorbExact,
    kBesq0,
    kBesq1,
    kIncrement,
    kHitting,
    kClades,
    kEntrance,
    kLmb,
    kPath,
    kKernel,
    kKernelTwoStep,
    kMixture,
    kType0Empty,
    kPdipFresh,
    kStick,
    kPathType0,
    kCrp,
    kCrpSensitivity,
    kCrpHalfZero,
    kCrpOracle,
    kMetric,
    kEkp,
    kEkpType0,
    kEkpCoarse,
};

Rng stream(uint64_t seed, Tag t, size_t r) { return Rng(seed, t).child(r); }

size_t replicas(const SuiteConfig& c, size_t def) { return c.replicas ? c.replicas : def; }

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

double largest(const IntervalPartition& p) {
    return p.blocks.empty() ? 0.0 : *std::max_element(p.blocks.begin(), p.blocks.end());
}

double kth_largest(const RankedSimplexPoint& r, size_t k) { return k < r.values.size() ? r.values[k] : 0.0; }

size_t count_above(const IntervalPartition& p, double h) {
    return size_t(std::count_if(p.blocks.begin(), p.blocks.end(), [h](double b) { return b > h; }));
}

// max |F_n(g) - F(g)| over grid points
double grid_cdf_error(std::vector<double> x, const std::vector<double>& grid, const std::function<double(double)>& F) {
    std::sort(x.begin(), x.end());
    double worst = 0;
    for (double g : grid) {
        double fn = double(std::upper_bound(x.begin(), x.end(), g) - x.begin()) / double(x.size());
        worst = std::max(worst, std::abs(fn - F(g)));
    }
    return worst;
}

void add_raw(SuiteResult& out, const std::string& name, std::vector<double> v) {
    out.raw.push_back({name, std::move(v)});
}

// ---------------------------------------------------------------- besq

void suite_besq(const SuiteConfig& c, SuiteResult& out) {
    const auto& o = c.overrides;
    size_t n = replicas(c, 10000);
    double a = o.get_double("a", 1.0);
    double delta = o.get_double("delta", 1e-4);
    double t = o.get_double("t", 0.5);
    auto euler = parallel_map(n, [&](size_t r) {
        Rng g = stream(c.seed, kAbsorbEuler, r);
        return besq_neg1_euler_lifetime(a, delta, g);
    });
    auto exact = parallel_map(n, [&](size_t r) {
        Rng g = stream(c.seed, kAbsorbExact, r);
        return besq_neg1_lifetime(a, g);
    });
    auto ig = [a](double x) { return inverse_gamma_cdf(x, 1.5, a / 2); };
    out.reports.push_back(ks_test("besq/absorption-euler", euler, ig, 0.02, c.seed));
    out.reports.push_back(ks_test("besq/absorption-exact", exact, ig, 0.02, c.seed));
    auto b0 = parallel_map(n, [&](size_t r) {
        Rng g = stream(c.seed, kBesq0, r);
        return besq_step(0, a, t, g);
    });
    out.reports.push_back(ks_test("besq/besq0-transition", b0, [&](double b) { return besq0_cdf(b, a, t); }, 0.03, c.seed));
    auto b1 = parallel_map(n, [&](size_t r) {
        Rng g = stream(c.seed, kBesq1, r);
        return besq_step(1, 0.0, t, g);
    });
    out.reports.push_back(ks_test("besq/besq1-from-zero", b1, [&](double b) { return gamma_cdf(b, 0.5, 1 / (2 * t)); },
                                  0.03, c.seed));
    add_raw(out, "absorption_euler", std::move(euler));
    add_raw(out, "absorption_exact", std::move(exact));
}

// ---------------------------------------------------------------- scaffold

void suite_scaffold(const SuiteConfig& c, SuiteResult& out) {
    const auto& o = c.overrides;
    size_t n_inc = size_t(o.get_int("increment_replicas", int64_t(replicas(c, 30000))));
    size_t n_hit = size_t(o.get_int("hitting_replicas", int64_t(replicas(c, 10000))));
    double z = o.get_double("trunc_z", 1e-4);
    double y = o.get_double("hit_level", 1.0);
    double theta = o.get_double("hit_theta", 1.0);
    double t_max = o.get_double("hit_t_max", 8.0);
    auto x = parallel_map(n_inc, [&](size_t r) {
        Rng g = stream(c.seed, kIncrement, r);
        return sample_increment(1.0, z, g);
    });
    for (double lam : o.get_list("lambdas", {0.5, 1.0, 2.0})) {
        double s = 0;
        for (double v : x) s += std::exp(-lam * v);
        double est = std::log(s / double(x.size()));
        double target = psi(lam);
        std::ostringstream note;
        note << "log_laplace=" << fmt17(est) << " psi=" << fmt17(target);
        out.reports.push_back(make_report("scaffold/increment-laplace/lambda=" + num(lam), "rel_error",
                                          std::abs(est / target - 1), 0.02, x.size(), c.seed, note.str()));
    }
    auto e = parallel_map(n_hit, [&](size_t r) {
        Rng g = stream(c.seed, kHitting, r);
        double t = first_passage_time(y, 0.0, z, t_max, g);
        return std::isinf(t) ? 0.0 : std::exp(-theta * t);
    });
    auto rep = z_test("scaffold/hitting-time-laplace", e, std::exp(-y * psi_inverse(theta)), 3, c.seed);
    out.reports.push_back(rep);
    add_raw(out, "increment", std::move(x));
    add_raw(out, "hitting_laplace_terms", std::move(e));
}

// ---------------------------------------------------------------- clade-stats

void suite_clades(const SuiteConfig& c, SuiteResult& out) {
    const auto& o = c.overrides;
    CladeRunParams p;
    p.trunc_z = o.get_double("trunc_z", 1e-4);
    p.near = o.get_double("near", 0.1);
    p.lt_band = o.get_double("lt_band", 1e-3);
    double target = o.get_double("local_time", 6000);
    size_t chunks = size_t(o.get_int("chunks", 16));
    p.target_local_time = target / double(chunks);
    auto pool = SpindlePool::shared_default();
    auto runs = parallel_map(chunks, [&](size_t r) {
        Rng g = stream(c.seed, kClades, r);
        return simulate_clades(p, *pool, g);
    });
    std::vector<CladeStats> cl;
    double lt = 0;
    uint64_t events = 0;
    for (auto& run : runs) {
        lt += run.local_time;
        events += run.events;
        for (auto& s : run.clades)
            if (!s.degenerate) cl.push_back(s);
    }
    double a0 = o.get_double("mass_cut", 0.25);
    double z0 = o.get_double("lifetime_cut", 0.25);
    double j0 = o.get_double("overshoot_cut", 0.25);
    std::vector<double> mass_ratio, life_over_mass, over_over_mass, life_ratio, mass_over_over, life_over_over,
        mass_given_life;
    for (auto& s : cl) {
        if (s.m0 > a0) {
            mass_ratio.push_back(s.m0 / a0);
            life_over_mass.push_back(s.zeta_plus / s.m0);
            over_over_mass.push_back(s.jplus / s.m0);
        }
        if (s.zeta_plus > z0) {
            life_ratio.push_back(s.zeta_plus / z0);
            mass_given_life.push_back(s.m0 / z0);
        }
        if (s.jplus > j0) {
            mass_over_over.push_back(s.m0 / s.jplus);
            life_over_over.push_back(s.zeta_plus / s.jplus);
        }
    }
    std::ostringstream info;
    info << "complete=" << cl.size() << " local_time=" << fmt17(lt) << " events=" << events;
    double min_clades = o.get_double("min_clades", 5000);
    out.reports.push_back(make_report("clade-stats/complete-biclades", "shortfall",
                                      std::max(0.0, min_clades - double(cl.size())), 0, cl.size(), c.seed, info.str()));
    auto grid_report = [&](const std::string& id, const std::vector<double>& x, const std::vector<double>& grid,
                           const std::function<double(double)>& F) {
        if (x.size() < 100) {
            out.reports.push_back(make_report(id, "abs_error", 1.0, 0.03, x.size(), c.seed, "too few clades"));
            return;
        }
        out.reports.push_back(make_report(id, "abs_error", grid_cdf_error(x, grid, F), 0.03, x.size(), c.seed,
                                          info.str()));
    };
    auto pareto_half = [](double r) { return r <= 1 ? 0.0 : 1 - 1 / std::sqrt(r); };
    grid_report("clade-stats/i-mass-tail", mass_ratio, {1.5, 2, 4, 8, 16}, pareto_half);
    grid_report("clade-stats/ii-lifetime-tail", life_ratio, {1.5, 2, 4, 8, 16}, pareto_half);
    grid_report("clade-stats/iii-overshoot-given-mass", over_over_mass, {0.1, 0.25, 0.5, 1, 2},
                [](double r) { return inverse_gamma_cdf(r, 1.5, 0.5); });
    grid_report("clade-stats/iv-lifetime-given-mass", life_over_mass, {0.1, 0.25, 0.5, 1, 2},
                [](double r) { return r > 0 ? std::exp(-1 / (2 * r)) : 0.0; });
    grid_report("clade-stats/v-mass-given-overshoot", mass_over_over, {0.25, 0.5, 1, 2, 4},
                [](double r) { return -std::expm1(-r / 2); });
    grid_report("clade-stats/vi-lifetime-given-overshoot", life_over_over, {1.1, 1.5, 2, 4, 8},
                [](double r) { return r >= 1 ? std::sqrt((r - 1) / r) : 0.0; });
    auto vii = closed_form("clade_mass_given_lifetime", {{"z", 1.0}});
    grid_report("clade-stats/vii-mass-given-lifetime", mass_given_life, {0.25, 0.5, 1, 2, 4},
                [&](double r) { return integrate([&](double t) { return 2 * t * vii(t * t); }, 0, std::sqrt(r), 1e-10); });

    auto rate_report = [&](const std::string& id, size_t count, double expected_rate, double k) {
        // Poisson count over the run's local time
        double rate = double(count) / lt;
        double se = std::sqrt(double(count)) / lt;
        std::ostringstream note;
        note << "rate=" << fmt17(rate) << " target=" << fmt17(expected_rate) << " se=" << fmt17(se);
        out.reports.push_back(
            make_report(id, "z", std::abs(rate - expected_rate) / std::max(se, 1e-300), k, count, c.seed, note.str()));
    };
    auto count_if = [&](auto pred) { return size_t(std::count_if(cl.begin(), cl.end(), pred)); };
    rate_report("clade-stats/i-mass-rate-a4", count_if([](const CladeStats& s) { return s.m0 > 4; }),
                closed_form("clade_mass_tail")(4.0), 3);
    rate_report("clade-stats/ii-lifetime-rate-z2", count_if([](const CladeStats& s) { return s.zeta_plus > 2; }),
                closed_form("clade_lifetime_tail")(2.0), 3);

    auto tail_report = [&](const std::string& id, size_t count, double expected) {
        double rate = double(count) / lt;
        std::ostringstream note;
        note << "rate=" << fmt17(rate) << " target=" << fmt17(expected) << " count=" << count;
        out.reports.push_back(make_report(id, "rel_error", std::abs(rate / expected - 1), 0.05, count, c.seed, note.str()));
    };
    tail_report("clade-stats/length-tail-1", count_if([](const CladeStats& s) { return s.len > 1; }),
                closed_form("clade_length_tail")(1.0));
    tail_report("clade-stats/jump-tail-1", count_if([](const CladeStats& s) { return s.jplus + s.jminus > 1; }),
                closed_form("clade_jump_tail")(1.0));
    tail_report("clade-stats/overshoot-tail-1", count_if([](const CladeStats& s) { return s.jplus > 1; }),
                closed_form("clade_overshoot_tail")(1.0));
    add_raw(out, "mass_ratio", std::move(mass_ratio));
    add_raw(out, "lifetime_over_mass", std::move(life_over_mass));
}

// ---------------------------------------------------------------- entrance-law

void suite_entrance(const SuiteConfig& c, SuiteResult& out) {
    const auto& o = c.overrides;
    size_t n = replicas(c, 10000);
    size_t n_lmb = size_t(o.get_int("lmb_draws", 200000));
    double a = o.get_double("a", 1.0);
    KernelParams kp;
    kp.eps = o.get_double("eps", 1e-7);
    auto ys = o.get_list("levels", {0.25, 0.5, 1.0});
    for (size_t k = 0; k < ys.size(); ++k) {
        double y = ys[k];
        std::string tag = "/y=" + num(y);
        auto parts = parallel_map(n, [&](size_t r) {
            Rng g = stream(c.seed, kEntrance, r).child(k);
            auto p = sample_entrance_type1(a, y, g, kp);
            return std::array<double, 2>{p.blocks.empty() ? -1.0 : p.blocks[0],
                                         p.blocks.empty() ? 0.0 : p.total_mass - p.blocks[0]};
        });
        uint64_t alive = 0;
        std::vector<double> rest;
        for (auto& p : parts) {
            if (p[0] < 0) continue;
            ++alive;
            rest.push_back(p[1]);
        }
        out.reports.push_back(proportion_test("entrance-law/survival" + tag, alive, n, -std::expm1(-a / (2 * y)), 3, c.seed));
        out.reports.push_back(ks_test("entrance-law/remainder-mass" + tag, rest,
                                      [&](double b) { return gamma_cdf(b, 0.5, 1 / (2 * y)); }, 0.03, c.seed));
        auto lead = parallel_map(n_lmb, [&](size_t r) {
            Rng g = stream(c.seed, kLmb, r).child(k);
            return sample_lmb(a, y, g);
        });
        for (auto& rep : laplace_check("entrance-law/lmb-laplace" + tag, lead, o.get_list("lambdas", {0.5, 1, 2}),
                                       [&](double l) { return lmb_laplace(l, a, y); }, 0.01, c.seed))
            out.reports.push_back(rep);
        add_raw(out, "remainder" + tag, std::move(rest));
    }
}

// ---------------------------------------------------------------- kernel-identities

void suite_kernel_identities(const SuiteConfig& c, SuiteResult& out) {
    const auto& o = c.overrides;
    size_t n = replicas(c, 10000);
    KernelParams kp;
    kp.eps = o.get_double("eps", 1e-7);
    double y = o.get_double("y", 0.25);
    // Chapman-Kolmogorov from a single unit block
    IntervalPartition one = make_partition({1.0});
    struct Ck {
        std::array<double, 4> direct{}, two{};
    };
    auto ck = parallel_map(n, [&](size_t r) {
        Rng g = stream(c.seed, kKernel, r);
        Rng h = stream(c.seed, kKernelTwoStep, r);
        Rng h2 = h.child(1);
        auto d = sample_kernel_type1(one, 2 * y, g, kp);
        auto t = sample_kernel_type1(sample_kernel_type1(one, y, h, kp), y, h2, kp);
        Ck out;
        auto rd = ranked(d), rt = ranked(t);
        out.direct = {d.total_mass, kth_largest(rd, 0), kth_largest(rd, 1), kth_largest(rd, 2)};
        out.two = {t.total_mass, kth_largest(rt, 0), kth_largest(rt, 1), kth_largest(rt, 2)};
        return out;
    });
    const char* ck_names[] = {"total-mass", "ranked-1", "ranked-2", "ranked-3"};
    for (size_t k = 0; k < 4; ++k) {
        std::vector<double> a, b;
        for (auto& x : ck) {
            a.push_back(x.direct[k]);
            b.push_back(x.two[k]);
        }
        out.reports.push_back(
            ks_two_sample(std::string("kernel-identities/chapman-kolmogorov/") + ck_names[k], a, b, 0.03, c.seed));
    }
    // Mixture of entrance laws reproduces the BESQ(0) transform
    IntervalPartition beta = make_partition({0.5, 0.3, 0.2});
    double ym = o.get_double("mixture_y", 0.5);
    auto mix = parallel_map(n, [&](size_t r) {
        Rng g = stream(c.seed, kMixture, r);
        return sample_kernel_type1(beta, ym, g, kp).total_mass;
    });
    for (double lam : {0.5, 1.0, 2.0}) {
        std::vector<double> e;
        for (double m : mix) e.push_back(std::exp(-lam * m));
        out.reports.push_back(z_test("kernel-identities/mixture-laplace/lambda=" + num(lam), e,
                                     std::exp(-lam * beta.total_mass / (2 * ym * lam + 1)), 3, c.seed));
    }
    auto t0 = parallel_map(n, [&](size_t r) {
        Rng g = stream(c.seed, kType0Empty, r);
        return sample_kernel_type0(make_partition({}), ym, g, kp).total_mass;
    });
    out.reports.push_back(ks_test("kernel-identities/type0-empty-mass", t0,
                                  [&](double b) { return gamma_cdf(b, 0.5, 1 / (2 * ym)); }, 0.03, c.seed));
    // PDIP against stick-breaking
    for (auto v : {PdipVariant::HalfHalf, PdipVariant::Half0}) {
        double theta = v == PdipVariant::HalfHalf ? 0.5 : 0.0;
        auto big = parallel_map(n, [&](size_t r) {
            Rng g = stream(c.seed, kPdipFresh, r).child(uint64_t(v));
            return largest(sample_pdip(v, g));
        });
        auto sb = parallel_map(n, [&](size_t r) {
            Rng g = stream(c.seed, kStick, r).child(uint64_t(v));
            return pd_largest_stick_breaking(0.5, theta, g);
        });
        out.reports.push_back(ks_two_sample("kernel-identities/pdip-largest/" + variant_name(v), big, sb, 0.03, c.seed));
    }
}

// ---------------------------------------------------------------- kernel-vs-path

struct Summary {
    double mass = 0;
    double left = 0;
    double count = 0;
    double diversity = 0;
};

Summary summarize(const IntervalPartition& p) {
    Summary s;
    s.mass = p.total_mass;
    s.left = p.blocks.empty() ? 0.0 : p.blocks.front();
    s.count = double(count_above(p, 0.01));
    s.diversity = p.total_diversity.value_or(0.0);
    return s;
}

void suite_kernel_vs_path(const SuiteConfig& c, SuiteResult& out) {
    const auto& o = c.overrides;
    size_t n = replicas(c, 10000);
    auto levels = o.get_list("levels", {0.25, 0.5});
    EvolveParams ep = evolve_params_from(o);
    KernelParams kp;
    kp.eps = o.get_double("eps", 1e-7);
    Rng init_rng(c.seed, 0);
    IntervalPartition beta = make_initial(o.get("initial", "explicit:1"), init_rng);
    auto pool = SpindlePool::shared_default();
    auto path = parallel_map(n, [&](size_t r) {
        PathEvolution ev(beta, Mode::Type1, ep, stream(c.seed, kPath, r), pool);
        std::vector<Summary> s;
        for (auto& st : ev.states(levels)) s.push_back(summarize(st));
        return s;
    });
    auto kern = parallel_map(n, [&](size_t r) {
        std::vector<Summary> s;
        for (size_t k = 0; k < levels.size(); ++k) {
            Rng g = stream(c.seed, kKernel, r).child(k);
            s.push_back(summarize(sample_kernel_type1(beta, levels[k], g, kp)));
        }
        return s;
    });
    for (size_t k = 0; k < levels.size(); ++k) {
        std::string tag = "/y=" + num(levels[k]);
        std::map<std::string, double Summary::*> fields{{"total-mass", &Summary::mass},
                                                        {"leftmost-mass", &Summary::left},
                                                        {"count-above-0.01", &Summary::count},
                                                        {"total-diversity", &Summary::diversity}};
        for (const char* f : {"total-mass", "leftmost-mass", "count-above-0.01", "total-diversity"}) {
            auto mp = fields.at(f);
            std::vector<double> a, b;
            for (auto& s : path) a.push_back(s[k].*mp);
            for (auto& s : kern) b.push_back(s[k].*mp);
            out.reports.push_back(ks_two_sample(std::string("kernel-vs-path/") + f + tag, a, b, 0.03, c.seed));
            add_raw(out, std::string("path/") + f + tag, std::move(a));
            add_raw(out, std::string("kernel/") + f + tag, std::move(b));
        }
    }
}

// ---------------------------------------------------------------- total-mass

void suite_total_mass(const SuiteConfig& c, SuiteResult& out) {
    const auto& o = c.overrides;
    size_t n = replicas(c, 10000);
    auto levels = o.get_list("levels", {0.25, 0.5});
    EvolveParams ep = evolve_params_from(o);
    Rng init_rng(c.seed, 0);
    IntervalPartition beta = make_initial(o.get("initial", "explicit:0.5,0.3,0.2"), init_rng);
    double a = beta.total_mass;
    auto pool = SpindlePool::shared_default();
    auto m1 = parallel_map(n, [&](size_t r) {
        PathEvolution ev(beta, Mode::Type1, ep, stream(c.seed, kPath, r), pool);
        return ev.masses(levels);
    });
    auto m0 = parallel_map(n, [&](size_t r) {
        PathEvolution ev(make_partition({}), Mode::Type0, ep, stream(c.seed, kPathType0, r), pool);
        return ev.masses(levels);
    });
    for (size_t k = 0; k < levels.size(); ++k) {
        double y = levels[k];
        std::string tag = "/y=" + num(y);
        std::vector<double> x1, x0;
        uint64_t dead = 0;
        for (auto& m : m1) {
            x1.push_back(m[k]);
            dead += m[k] <= 0;
        }
        for (auto& m : m0) x0.push_back(m[k]);
        out.reports.push_back(
            ks_test("total-mass/type1-besq0" + tag, x1, [&](double b) { return besq0_cdf(b, a, y); }, 0.03, c.seed));
        out.reports.push_back(proportion_test("total-mass/type1-absorbed" + tag, dead, n, std::exp(-a / (2 * y)), 3, c.seed));
        out.reports.push_back(ks_test("total-mass/type0-empty-gamma" + tag, x0,
                                      [&](double b) { return gamma_cdf(b, 0.5, 1 / (2 * y)); }, 0.03, c.seed));
        add_raw(out, "type1_mass" + tag, std::move(x1));
        add_raw(out, "type0_mass" + tag, std::move(x0));
    }
}

// ---------------------------------------------------------------- pseudo-stationarity

void suite_pseudo(const SuiteConfig& c, SuiteResult& out) {
    const auto& o = c.overrides;
    size_t n = replicas(c, 20000);
    size_t n_fresh = size_t(o.get_int("fresh", 100000));
    double rho = o.get_double("rho", 1.0);
    double y = o.get_double("y", 0.5);
    double pdip_eps = o.get_double("pdip_eps", 1e-7);
    EvolveParams ep = evolve_params_from(o);
    auto pool = SpindlePool::shared_default();
    auto res = parallel_map(n, [&](size_t r) {
        Rng g = stream(c.seed, kPath, r);
        Rng gi = g.child(0);
        IntervalPartition beta = make_initial("exp-pdip:half-zero:" + fmt17(rho), gi, pdip_eps);
        PathEvolution ev(beta, Mode::Type1, ep, g.child(1), pool);
        auto st = ev.state(y);
        double m = st.total_mass;
        return std::array<double, 2>{m, m > 0 ? largest(st) / m : 0.0};
    });
    uint64_t alive = 0;
    std::vector<double> mass, top;
    for (auto& r : res) {
        if (!(r[0] > 0)) continue;
        ++alive;
        mass.push_back(r[0]);
        top.push_back(r[1]);
    }
    double k = 2 * y * rho + 1;
    out.reports.push_back(proportion_test("pseudo-stationarity/survival", alive, n, 1 / k, 3, c.seed));
    out.reports.push_back(ks_test("pseudo-stationarity/conditioned-mass", mass,
                                  [&](double m) { return exponential_cdf(m, rho / k); }, 0.03, c.seed));
    auto fresh = parallel_map(n_fresh, [&](size_t r) {
        Rng g = stream(c.seed, kPdipFresh, r);
        return largest(sample_pdip(PdipVariant::Half0, g));
    });
    out.reports.push_back(ks_two_sample("pseudo-stationarity/top-block-shape", top, fresh, 0.03, c.seed));
    add_raw(out, "conditioned_mass", std::move(mass));
    add_raw(out, "top_block", std::move(top));
}

// ---------------------------------------------------------------- stationarity

void suite_stationarity(const SuiteConfig& c, SuiteResult& out) {
    const auto& o = c.overrides;
    size_t n = replicas(c, 10000);
    size_t n_fresh = size_t(o.get_int("fresh", 100000));
    double u = o.get_double("u", 0.3);
    double pdip_eps = o.get_double("pdip_eps", 1e-7);
    Mode mode = parse_mode(o.get("mode", "type0"));
    PdipVariant v = mode == Mode::Type0 ? PdipVariant::HalfHalf : PdipVariant::Half0;
    EvolveParams ep = evolve_params_from(o);
    auto pool = SpindlePool::shared_default();
    auto res = parallel_map(n, [&](size_t r) {
        Rng g = stream(c.seed, kPath, r);
        PdipOptions po;
        po.eps = pdip_eps;
        Rng gi = g.child(0);
        IntervalPartition beta = sample_pdip(v, gi, po);
        PathEvolution ev(beta, mode, ep, g.child(1), pool);
        auto dp = depoissonize(ev, {u});
        std::array<double, 6> s{};
        if (dp.states.empty() || dp.truncated) {
            s[4] = 1;
            return s;
        }
        auto rk = ranked(dp.states.front());
        for (size_t i = 0; i < 3; ++i) s[i] = kth_largest(rk, i);
        s[3] = dp.states.front().total_diversity.value_or(0.0);
        s[5] = ev.masses({dp.rho.front()}).front();
        return s;
    });
    auto fresh = parallel_map(n_fresh, [&](size_t r) {
        Rng g = stream(c.seed, kPdipFresh, r);
        auto p = sample_pdip(v, g);
        auto rk = ranked(p);
        return std::array<double, 4>{kth_largest(rk, 0), kth_largest(rk, 1), kth_largest(rk, 2),
                                     p.total_diversity.value_or(0.0)};
    });
    uint64_t lost = 0;
    for (auto& r : res) lost += r[4] > 0;
    const char* names[] = {"ranked-1", "ranked-2", "ranked-3", "total-diversity"};
    for (size_t i = 0; i < 4; ++i) {
        std::vector<double> a, b;
        for (auto& r : res)
            if (r[4] == 0) a.push_back(r[i]);
        for (auto& r : fresh) b.push_back(r[i]);
        auto rep = ks_two_sample(std::string("stationarity/") + mode_name(mode) + "/" + names[i], a, b, 0.03, c.seed);
        rep.note = "truncated=" + std::to_string(lost);
        out.reports.push_back(rep);
        add_raw(out, std::string("depoissonized/") + names[i], std::move(a));
    }
    std::vector<double> mass;
    for (auto& r : res)
        if (r[4] == 0) mass.push_back(r[5]);
    for (size_t i : {size_t(0), size_t(3)}) {
        std::vector<double> a;
        for (auto& r : res)
            if (r[4] == 0) a.push_back(r[i]);
        out.exploratory.push_back({std::string("stationarity/") + mode_name(mode) + "/mass-vs-" + names[i],
                                   "pearson", pearson(mass, a), mass.size()});
    }
    add_raw(out, "depoissonized/mass-at-rho", std::move(mass));
}

// ---------------------------------------------------------------- crp-limit

void suite_crp(const SuiteConfig& c, SuiteResult& out) {
    const auto& o = c.overrides;
    size_t n = replicas(c, 2000);
    size_t n_oracle = size_t(o.get_int("oracle", 100000));
    int64_t customers = o.get_int("customers", 2000);
    double burn = o.get_double("burn_in", 50);
    CrpInit init = parse_init(o.get("init", "seating"));
    auto run = [&](CrpParams p, Tag tag, CrpInit in, size_t count) {
        return parallel_map(count, [&](size_t r) {
            Rng g = stream(c.seed, tag, r);
            return kth_largest(ranked_sample(customers, p, burn, g, in), 0);
        });
    };
    auto oracle = [&](double theta) {
        return parallel_map(n_oracle, [&](size_t r) {
            Rng g = stream(c.seed, kCrpOracle, r).child(theta > 0);
            return pd_largest_stick_breaking(0.5, theta, g);
        });
    };
    auto sb_hh = oracle(0.5);
    auto top = run(CrpParams{0.5, 0.5}, kCrp, init, n);
    // initial-condition sensitivity, reported alongside
    size_t n_sens = std::max<size_t>(100, n / 10);
    auto single = run(CrpParams{0.5, 0.5}, kCrpSensitivity, CrpInit::SingleTable, n_sens);
    auto rep = ks_two_sample("crp-limit/half-half/top-block", top, sb_hh, 0.05, c.seed);
    rep.note = "init=" + init_name(init) + " ks_from_single_table=" + fmt17(ks_distance_two_sample(single, sb_hh));
    out.reports.push_back(rep);
    auto sb_h0 = oracle(0.0);
    auto top0 = run(CrpParams{0.5, 0.0}, kCrpHalfZero, init, n);
    out.reports.push_back(ks_two_sample("crp-limit/half-zero/top-block", top0, sb_h0, 0.05, c.seed));
    add_raw(out, "top_block/half-half", std::move(top));
    add_raw(out, "top_block/half-zero", std::move(top0));
}

// ---------------------------------------------------------------- metric-axioms

IntervalPartition random_marked(Rng& g, size_t max_blocks) {
    size_t k = g.below(max_blocks + 1);
    std::vector<double> b, m;
    double d = 0;
    for (size_t i = 0; i < k; ++i) {
        b.push_back(g.exponential(1.0) * 0.5);
        d += g.exponential(2.0);
        m.push_back(d);
    }
    return make_marked(b, m, d + g.exponential(2.0));
}

void suite_metric(const SuiteConfig& c, SuiteResult& out) {
    const auto& o = c.overrides;
    size_t pairs = size_t(o.get_int("pairs", 200));
    size_t triples = size_t(o.get_int("triples", 1000));
    auto diff = parallel_map(pairs, [&](size_t r) {
        Rng g = stream(c.seed, kMetric, r);
        auto b = random_marked(g, 6), h = random_marked(g, 6);
        return std::abs(distance_dI(b, h) - distance_dI_enumerate(b, h));
    });
    out.reports.push_back(make_report("metric-axioms/dI-vs-enumeration", "abs_error",
                                      *std::max_element(diff.begin(), diff.end()), 1e-9, pairs, c.seed));
    struct Viol {
        double identity = 0, symmetry = 0, triangle = 0, haus = 0, haus_equiv = 0, scaling = 0;
    };
    auto v = parallel_map(triples, [&](size_t r) {
        Rng g = stream(c.seed, kMetric, r).child(1);
        auto a = random_marked(g, 8), b = random_marked(g, 8), d = random_marked(g, 8);
        Viol x;
        double ab = distance_dI(a, b), ba = distance_dI(b, a), ad = distance_dI(a, d), bd = distance_dI(b, d);
        x.identity = distance_dI(a, a);
        x.symmetry = std::abs(ab - ba);
        x.triangle = std::max(0.0, ad - ab - bd);
        double hp = distance_dH_prime(a, b);
        x.haus = std::max(0.0, hp - ab);
        x.haus_equiv = std::max(0.0, distance_dH(a, b) - 3 * hp);
        double cc = std::exp(4 * g.uniform() - 2);
        double sab = distance_dI(scale(cc, a), scale(cc, b));
        x.scaling = std::max({0.0, std::min(cc, std::sqrt(cc)) * ab - sab, sab - std::max(cc, std::sqrt(cc)) * ab});
        return x;
    });
    auto worst = [&](double Viol::*f) {
        double w = 0;
        for (auto& x : v) w = std::max(w, x.*f);
        return w;
    };
    const double tol = 1e-9;
    out.reports.push_back(make_report("metric-axioms/identity", "abs_error", worst(&Viol::identity), tol, triples, c.seed));
    out.reports.push_back(make_report("metric-axioms/symmetry", "abs_error", worst(&Viol::symmetry), tol, triples, c.seed));
    out.reports.push_back(make_report("metric-axioms/triangle", "abs_error", worst(&Viol::triangle), tol, triples, c.seed));
    out.reports.push_back(
        make_report("metric-axioms/dH-prime-below-dI", "abs_error", worst(&Viol::haus), tol, triples, c.seed));
    out.reports.push_back(
        make_report("metric-axioms/dH-below-3dH-prime", "abs_error", worst(&Viol::haus_equiv), tol, triples, c.seed));
    out.reports.push_back(make_report("metric-axioms/scaling", "abs_error", worst(&Viol::scaling), tol, triples, c.seed));
}

// ---------------------------------------------------------------- ekp-generator

void suite_ekp(const SuiteConfig& c, SuiteResult& out) {
    const auto& o = c.overrides;
    GeneratorCheck g;
    g.x = o.get_list("x", {1.0});
    g.m = int(o.get_int("m", 1));
    g.u = o.get_double("u", 0.01);
    g.replicas = replicas(c, 100000);
    g.evolve = evolve_params_from(o);
    if (!o.has("stage")) g.evolve.stage = 0.05;
    if (!o.has("lt_band")) g.evolve.lt_band = 1e-4;
    g.bias_budget = o.get_double("bias_budget", 0.1);
    g.seed = Rng(c.seed, kEkp).child(0).seed() ^ kEkp;
    g.mode = Mode::Type1;
    auto fine = generator_estimate(g);
    auto report = [&](const std::string& id, const GeneratorEstimate& e, size_t n, double extra = 0) {
        std::ostringstream note;
        note << "quotient=" << fmt17(e.quotient) << " target=" << fmt17(e.target) << " se=" << fmt17(e.se)
             << " extinct=" << e.extinct;
        out.reports.push_back(make_report(id, "abs_error", std::abs(e.quotient - e.target),
                                          3 * e.se + g.bias_budget + extra, n, c.seed, note.str()));
    };
    report("ekp-generator/type1/q" + std::to_string(g.m) + "/u=" + num(g.u), fine, g.replicas);
    size_t n_extra = size_t(o.get_int("extra_replicas", int64_t(std::max<size_t>(100, g.replicas / 5))));
    if (o.get_bool("extras", true)) {
        // coarser step; the linear extrapolation 2 D(u) - D(2u) removes the O(u) term
        GeneratorCheck g2 = g;
        g2.u = 2 * g.u;
        g2.replicas = n_extra;
        g2.seed = g.seed ^ kEkpCoarse;
        auto coarse = generator_estimate(g2);
        report("ekp-generator/type1/q" + std::to_string(g.m) + "/u=" + num(g2.u), coarse, n_extra, 0);
        GeneratorEstimate rich = fine;
        rich.quotient = 2 * fine.quotient - coarse.quotient;
        rich.se = std::sqrt(4 * fine.se * fine.se + coarse.se * coarse.se);
        report("ekp-generator/type1/q" + std::to_string(g.m) + "/extrapolated", rich, n_extra);
        GeneratorCheck g0 = g;
        g0.mode = Mode::Type0;
        g0.replicas = n_extra;
        g0.seed = g.seed ^ kEkpType0;
        report("ekp-generator/type0/q" + std::to_string(g.m) + "/u=" + num(g.u), generator_estimate(g0), n_extra);
    }
}

using SuiteFn = void (*)(const SuiteConfig&, SuiteResult&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
    static const std::vector<std::pair<std::string, SuiteFn>> r{
        {"besq", suite_besq},
        {"scaffold", suite_scaffold},
        {"clade-stats", suite_clades},
        {"entrance-law", suite_entrance},
        {"kernel-identities", suite_kernel_identities},
        {"kernel-vs-path", suite_kernel_vs_path},
        {"total-mass", suite_total_mass},
        {"pseudo-stationarity", suite_pseudo},
        {"stationarity", suite_stationarity},
        {"crp-limit", suite_crp},
        {"ekp-generator", suite_ekp},
        {"metric-axioms", suite_metric},
    };
    return r;
}

}  // namespace

IntervalPartition make_initial(const std::string& desc, Rng& rng, double pdip_eps) {
    auto colon = desc.find(':');
    std::string kind = desc.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : desc.substr(colon + 1);
    if (kind == "empty") return make_partition({});
    if (kind == "explicit") {
        auto b = parse_list(arg);
        for (double x : b)
            if (!(x > 0)) throw std::invalid_argument("initial: explicit blocks must be positive");
        return make_partition(b);
    }
    PdipOptions po;
    po.eps = pdip_eps;
    if (kind == "pdip") return sample_pdip(parse_variant(arg), rng, po);
    if (kind == "exp-pdip") {
        auto c2 = arg.find(':');
        PdipVariant v = parse_variant(arg.substr(0, c2));
        double rate = c2 == std::string::npos ? 1.0 : std::stod(arg.substr(c2 + 1));
        if (!(rate > 0)) throw std::invalid_argument("initial: rate must be positive");
        double m = rng.exponential(rate);
        return scale(m, sample_pdip(v, rng, po));
    }
    throw std::invalid_argument("unknown initial state: " + desc);
}

EvolveParams evolve_params_from(const Config& c) {
    EvolveParams p;
    p.trunc_z = c.get_double("trunc_z", p.trunc_z);
    p.lead_delta = c.get_double("lead_delta", p.lead_delta);
    p.lt_band = c.get_double("lt_band", p.lt_band);
    p.mass_floor = c.get_double("mass_floor", p.mass_floor);
    p.stage = c.get_double("stage", p.stage);
    p.dust_grid = c.get_double("dust_grid", p.dust_grid);
    p.dust_correction = c.get_bool("dust_correction", p.dust_correction);
    if (!(p.trunc_z > 0) || !(p.lead_delta > 0) || !(p.lt_band > 0) || !(p.stage > 0) || !(p.dust_grid > 0))
        throw std::invalid_argument("evolution parameters must be positive");
    return p;
}

bool SuiteResult::pass() const {
    for (const auto& r : reports)
        if (!r.pass) return false;
    return !reports.empty();
}

std::vector<std::string> suite_names() {
    std::vector<std::string> n;
    for (auto& [k, f] : registry()) n.push_back(k);
    return n;
}

SuiteResult run_suite(const SuiteConfig& c) {
    SuiteResult out;
    out.suite = c.suite;
    out.seed = c.seed;
    for (auto& [k, f] : registry()) {
        if (k == c.suite) {
            f(c, out);
            auto unused = c.overrides.unused();
            if (!unused.empty()) {
                std::string msg = "suite " + c.suite + ": unknown configuration keys:";
                for (auto& u : unused) msg += " " + u;
                throw std::invalid_argument(msg);
            }
            return out;
        }
    }
    throw std::invalid_argument("unknown suite: " + c.suite);
}

nlohmann::ordered_json suite_json(const SuiteResult& r) {
    nlohmann::ordered_json j;
    j["suite"] = r.suite;
    j["seed"] = r.seed;
    j["pass"] = r.pass();
    j["reports"] = nlohmann::ordered_json::array();
    for (const auto& rep : r.reports) j["reports"].push_back(to_json(rep));
    if (!r.exploratory.empty()) {
        j["exploratory"] = nlohmann::ordered_json::array();
        for (const auto& e : r.exploratory)
            j["exploratory"].push_back({{"id", e.id}, {"statistic", e.statistic}, {"value", e.value}, {"n", e.n}});
    }
    return j;
}

std::string suite_csv(const SuiteResult& r) {
    std::ostringstream os;
    os << "series,index,value\n";
    for (const auto& s : r.raw)
        for (size_t i = 0; i < s.values.size(); ++i)
            os << r.suite << '/' << s.name << ',' << i << ',' << fmt17(s.values[i]) << '\n';
    return os.str();
}

}  // namespace ipd
