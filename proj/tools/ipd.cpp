#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ipd/crp.hpp"
#include "ipd/depois.hpp"
#include "ipd/evolve.hpp"
#include "ipd/kernel.hpp"
#include "ipd/replicas.hpp"
#include "ipd/suites.hpp"

using namespace ipd;

namespace {

enum Exit { kOk = 0, kFail = 1, kUsage = 2 };

// Tags for CLI sampling streams; replica r uses Rng(seed, tag).child(r).
enum CliTag : uint64_t { kSimulate = 101, kKernelSample, kCrpRun, kDepois, kInitial };

struct Common {
    uint64_t seed = 42;
    size_t replicas = 0;
    std::string out;
    std::string config;
    int workers = 0;
    std::vector<std::string> sets;
};

void add_common(CLI::App* c, Common& o) {
    c->add_option("--seed", o.seed, "Master seed");
    c->add_option("--replicas", o.replicas, "Number of replicas")->check(CLI::PositiveNumber);
    c->add_option("--out", o.out, "Output path (default stdout)");
    c->add_option("--config", o.config, "Flat key=value configuration file")->check(CLI::ExistingFile);
    c->add_option("--workers", o.workers, "Worker threads (0: runtime default)")->check(CLI::NonNegativeNumber);
    c->add_option("--set", o.sets, "Configuration override key=value (repeatable)");
}

// Config file first, then --set overrides. Harness keys seed/replicas/out
// fill flags that were not given on the command line.
Config load_config(const Common& o, CLI::App* c, Common& resolved) {
    Config cfg = o.config.empty() ? Config{} : Config::load(o.config);
    for (const auto& s : o.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--set expects key=value: " + s);
        cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    resolved = o;
    if (c->count("--seed") == 0 && cfg.has("seed")) resolved.seed = uint64_t(cfg.get_int("seed", 42));
    if (c->count("--replicas") == 0 && cfg.has("replicas")) {
        auto n = cfg.get_int("replicas", 0);
        if (n < 1) throw std::invalid_argument("config: replicas must be >= 1");
        resolved.replicas = size_t(n);
    }
    if (c->count("--out") == 0 && cfg.has("out")) resolved.out = cfg.get("out", "");
    if (c->count("--workers") == 0 && cfg.has("workers")) resolved.workers = int(cfg.get_int("workers", 0));
    set_workers(resolved.workers);
    return cfg;
}

void write_out(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

std::vector<double> levels_from(const Config& cfg, const std::string& flag) {
    auto v = parse_list(flag.empty() ? cfg.get("levels", "0.25,0.5,1") : flag);
    if (v.empty()) throw std::invalid_argument("levels must be nonempty");
    for (size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0)) throw std::invalid_argument("levels must be >= 0");
        if (i && !(v[i] > v[i - 1])) throw std::invalid_argument("levels must be increasing");
    }
    return v;
}

void reject_unused(const Config& cfg) {
    auto u = cfg.unused();
    if (u.empty()) return;
    std::string msg = "unknown configuration keys:";
    for (auto& k : u) msg += " " + k;
    throw std::invalid_argument(msg);
}

std::string partitions_csv(const std::vector<IntervalPartition>& ps) {
    std::ostringstream os;
    os << "replica,block_index,mass,div_mark\n";
    for (size_t r = 0; r < ps.size(); ++r) {
        const auto& p = ps[r];
        for (size_t i = 0; i < p.blocks.size(); ++i)
            os << r << ',' << i << ',' << fmt17(p.blocks[i]) << ',' << (p.marked() ? fmt17(p.marks[i]) : "") << '\n';
        os << r << ",-1," << fmt17(p.dust()) << ',' << (p.total_diversity ? fmt17(*p.total_diversity) : "") << '\n';
    }
    return os.str();
}

std::map<std::string, double> parse_params(const std::string& s) {
    std::map<std::string, double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--params expects k=v[,k=v]: " + item);
        out[item.substr(0, eq)] = parse_list(item.substr(eq + 1)).at(0);
    }
    return out;
}

class Timer {
public:
    explicit Timer(std::string what) : what_(std::move(what)), t0_(std::chrono::steady_clock::now()) {}
    ~Timer() {
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        std::fprintf(stderr, "%s: %.2f s on %d workers\n", what_.c_str(), s, workers());
    }

private:
    std::string what_;
    std::chrono::steady_clock::time_point t0_;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interval partition diffusions: simulation and validation harness"};
    app.require_subcommand(1);

    Common sim_o, ks_o, crp_o, dp_o, val_o;
    std::string initial = "explicit:1", mode = "type1", levels_flag, y_list = "0.5", u_list = "0.1,0.2,0.3";

    auto* sim = app.add_subcommand("simulate", "Pathwise evolution sampled at given levels (CSV)");
    add_common(sim, sim_o);
    sim->add_option("--initial", initial, "empty | explicit:<b1,b2,..> | pdip:<variant> | exp-pdip:<variant>:<rate>");
    sim->add_option("--mode", mode, "type1 | type0");
    sim->add_option("--levels", levels_flag, "Increasing comma list of levels");

    auto* ks = app.add_subcommand("kernel-sample", "Independent draws from the transition kernel (CSV)");
    add_common(ks, ks_o);
    ks->add_option("--initial", initial, "Initial state");
    ks->add_option("--mode", mode, "type1 | type0");
    ks->add_option("--y", y_list, "Level");

    double alpha = 0.5, theta = 0.0, t_end = 50;
    int64_t customers = 100;
    std::string sizes, lineage_out;
    std::string init = "seating";
    auto* crp = app.add_subcommand("crp", "Up-down Chinese restaurant chain event log (CSV)");
    add_common(crp, crp_o);
    crp->add_option("--alpha", alpha, "Discount in (0,1)");
    crp->add_option("--theta", theta, "Left-table rate >= 0");
    crp->add_option("--customers", customers, "Initial customer count")->check(CLI::PositiveNumber);
    crp->add_option("--sizes", sizes, "Explicit initial table sizes, left to right");
    crp->add_option("--init", init, "seating | single | singletons");
    crp->add_option("--time", t_end, "Time horizon")->check(CLI::NonNegativeNumber);
    crp->add_option("--lineage", lineage_out, "Also write table lineage CSV to this path");

    auto* dp = app.add_subcommand("depois", "De-Poissonized, normalized evolution at given u (CSV)");
    add_common(dp, dp_o);
    dp->add_option("--initial", initial, "Initial state");
    dp->add_option("--mode", mode, "type1 | type0");
    dp->add_option("--u", u_list, "Nondecreasing comma list of de-Poissonized times");
    std::string trace_in;
    dp->add_option("--in", trace_in, "Post-process a simulate CSV (levels from 0) instead of simulating")
        ->check(CLI::ExistingFile)
        ->excludes("--initial", "--mode", "--replicas");

    std::string form, params, at;
    bool list_forms = false;
    auto* ev = app.add_subcommand("eval", "Evaluate a closed form");
    ev->add_option("--form", form, "Closed-form name");
    ev->add_option("--params", params, "Parameters k=v[,k=v]");
    ev->add_option("--at", at, "Comma list of arguments");
    ev->add_flag("--list", list_forms, "List closed-form names");

    std::string suite = "all", raw_out;
    bool list_suites = false;
    auto* val = app.add_subcommand("validate", "Run validation suites; exit 0 iff all pass (JSON)");
    add_common(val, val_o);
    val->add_option("--suite", suite, "Suite name or 'all'");
    val->add_option("--raw", raw_out, "Write raw statistics CSV to this path");
    val->add_flag("--list", list_suites, "List suite names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*sim) {
            Common o;
            Config cfg = load_config(sim_o, sim, o);
            auto levels = levels_from(cfg, levels_flag);
            Mode m = parse_mode(sim->count("--mode") ? mode : cfg.get("mode", mode));
            std::string desc = sim->count("--initial") ? initial : cfg.get("initial", initial);
            EvolveParams ep = evolve_params_from(cfg);
            double pdip_eps = cfg.get_double("pdip_eps", 1e-7);
            reject_unused(cfg);
            size_t n = o.replicas ? o.replicas : 1;
            Timer t("simulate");
            auto traces = parallel_map(n, [&](size_t r) {
                Rng g = Rng(o.seed, kSimulate).child(r);
                Rng gi = Rng(o.seed, kInitial).child(r);
                auto beta = make_initial(desc, gi, pdip_eps);
                auto tr = evolve(beta, m, levels, ep, g);
                tr.seed = o.seed;
                return tr;
            });
            write_out(o.out, trace_csv(traces));
            return kOk;
        }
        if (*ks) {
            Common o;
            Config cfg = load_config(ks_o, ks, o);
            Mode m = parse_mode(ks->count("--mode") ? mode : cfg.get("mode", mode));
            std::string desc = ks->count("--initial") ? initial : cfg.get("initial", initial);
            double y = parse_list(ks->count("--y") ? y_list : cfg.get("y", y_list)).at(0);
            if (!(y > 0)) throw std::invalid_argument("--y must be positive");
            KernelParams kp;
            kp.eps = cfg.get_double("eps", kp.eps);
            double pdip_eps = cfg.get_double("pdip_eps", 1e-7);
            reject_unused(cfg);
            size_t n = o.replicas ? o.replicas : 1;
            Timer t("kernel-sample");
            auto ps = parallel_map(n, [&](size_t r) {
                Rng g = Rng(o.seed, kKernelSample).child(r);
                Rng gi = Rng(o.seed, kInitial).child(r);
                auto beta = make_initial(desc, gi, pdip_eps);
                return m == Mode::Type1 ? sample_kernel_type1(beta, y, g, kp) : sample_kernel_type0(beta, y, g, kp);
            });
            write_out(o.out, partitions_csv(ps));
            return kOk;
        }
        if (*crp) {
            Common o;
            Config cfg = load_config(crp_o, crp, o);
            CrpParams p;
            p.alpha = crp->count("--alpha") ? alpha : cfg.get_double("alpha", alpha);
            p.theta = crp->count("--theta") ? theta : cfg.get_double("theta", theta);
            p.validate();
            double horizon = crp->count("--time") ? t_end : cfg.get_double("time", t_end);
            int64_t n0 = crp->count("--customers") ? customers : cfg.get_int("customers", customers);
            std::string sz = crp->count("--sizes") ? sizes : cfg.get("sizes", sizes);
            CrpInit in = parse_init(crp->count("--init") ? init : cfg.get("init", init));
            reject_unused(cfg);
            if (o.replicas > 1) throw std::invalid_argument("crp writes a single chain; --replicas must be 1");
            Rng g = Rng(o.seed, kCrpRun).child(0);
            CrpState s;
            if (!sz.empty()) {
                std::vector<int64_t> v;
                for (double x : parse_list(sz)) {
                    if (!(x >= 1) || x != double(int64_t(x))) throw std::invalid_argument("--sizes must be positive integers");
                    v.push_back(int64_t(x));
                }
                s = crp_initial(v, p);
            } else if (in == CrpInit::Seating) {
                s = crp_seating(n0, p, g);
            } else if (in == CrpInit::SingleTable) {
                s = crp_initial({n0}, p);
            } else {
                s = crp_initial(std::vector<int64_t>(size_t(n0), 1), p);
            }
            CrpLog log;
            log.keep_lineage = !lineage_out.empty();
            Timer t("crp");
            crp_run(s, horizon, g, &log);
            write_out(o.out, crp_csv(log));
            if (!lineage_out.empty()) write_out(lineage_out, lineage_csv(log));
            return kOk;
        }
        if (*dp) {
            Common o;
            Config cfg = load_config(dp_o, dp, o);
            Mode m = parse_mode(dp->count("--mode") ? mode : cfg.get("mode", mode));
            std::string desc = dp->count("--initial") ? initial : cfg.get("initial", initial);
            auto u = parse_list(dp->count("--u") ? u_list : cfg.get("u", u_list));
            if (!trace_in.empty()) {
                reject_unused(cfg);
                std::ifstream f(trace_in);
                auto traces = traces_from_csv(f);
                Timer t("depois");
                auto res = parallel_map(traces.size(), [&](size_t r) {
                    if (traces[r].levels.empty() || traces[r].levels.front() != 0.0)
                        throw std::invalid_argument("depois --in: each replica needs level 0");
                    return depoissonize(traces[r], u);
                });
                write_out(o.out, depois_csv(res));
                return kOk;
            }
            EvolveParams ep = evolve_params_from(cfg);
            double pdip_eps = cfg.get_double("pdip_eps", 1e-7);
            reject_unused(cfg);
            size_t n = o.replicas ? o.replicas : 1;
            Timer t("depois");
            auto traces = parallel_map(n, [&](size_t r) {
                Rng gi = Rng(o.seed, kInitial).child(r);
                auto beta = make_initial(desc, gi, pdip_eps);
                PathEvolution pe(beta, m, ep, Rng(o.seed, kDepois).child(r));
                return depoissonize(pe, u);
            });
            write_out(o.out, depois_csv(traces));
            return kOk;
        }
        if (*ev) {
            if (list_forms) {
                for (auto& n : closed_form_names()) std::cout << n << '\n';
                return kOk;
            }
            if (form.empty()) throw std::invalid_argument("eval: --form is required");
            auto cf = closed_form(form, parse_params(params));
            std::cout << "x," << kind_name(cf.kind) << '\n';
            for (double x : parse_list(at)) std::cout << fmt17(x) << ',' << fmt17(cf(x)) << '\n';
            if (cf.atom > 0) std::cout << "# atom at " << fmt17(cf.lo) << ": " << fmt17(cf.atom) << '\n';
            return kOk;
        }
        if (*val) {
            if (list_suites) {
                for (auto& n : suite_names()) std::cout << n << '\n';
                return kOk;
            }
            Common o;
            Config cfg = load_config(val_o, val, o);
            std::string which = val->count("--suite") ? suite : cfg.get("suite", suite);
            if (val->count("--raw") == 0 && cfg.has("raw")) raw_out = cfg.get("raw", "");
            std::vector<std::string> names = which == "all" ? suite_names() : std::vector<std::string>{which};
            nlohmann::ordered_json doc = nlohmann::ordered_json::array();
            std::string raw;
            bool all_pass = true;
            for (const auto& name : names) {
                SuiteConfig sc;
                sc.suite = name;
                sc.seed = o.seed;
                sc.replicas = o.replicas;
                for (const auto& [k, v] : cfg.values())
                    if (k != "seed" && k != "replicas" && k != "out" && k != "workers" && k != "suite" && k != "raw")
                        sc.overrides.set(k, v);
                Timer t("suite " + name);
                auto res = run_suite(sc);
                all_pass = all_pass && res.pass();
                for (const auto& r : res.reports)
                    std::fprintf(stderr, "%s %s %s=%.6g threshold=%.6g n=%llu\n", r.pass ? "PASS" : "FAIL", r.id.c_str(),
                                 r.statistic.c_str(), r.value, r.threshold, (unsigned long long)r.n);
                doc.push_back(suite_json(res));
                if (!raw_out.empty()) {
                    std::string csv = suite_csv(res);
                    raw += raw.empty() ? csv : csv.substr(csv.find('\n') + 1);
                }
            }
            write_out(o.out, (names.size() == 1 ? doc[0] : doc).dump(2) + "\n");
            if (!raw_out.empty()) write_out(raw_out, raw);
            return all_pass ? kOk : kFail;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ipd: %s\n", e.what());
        return kUsage;
    }
    return kUsage;
}
