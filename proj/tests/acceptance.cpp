// One pass/fail line per acceptance criterion.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipd/replicas.hpp"
#include "ipd/suites.hpp"

using namespace ipd;

namespace {

struct Criterion {
    int id;
    const char* title;
    const char* suite;
};

const std::vector<Criterion> kCriteria{
    {1, "BESQ(-1) absorption time", "besq"},
    {2, "scaffolding law", "scaffold"},
    {3, "clade statistics", "clade-stats"},
    {4, "entrance law", "entrance-law"},
    {5, "kernel vs pathwise construction", "kernel-vs-path"},
    {6, "total mass processes", "total-mass"},
    {7, "pseudo-stationarity", "pseudo-stationarity"},
    {8, "stationarity after de-Poissonization", "stationarity"},
    {9, "EKP generator", "ekp-generator"},
    {10, "metric module", "metric-axioms"},
    {11, "up-down CRP limit", "crp-limit"},
    {12, "determinism across worker counts", nullptr},
};

// Small configurations rerun under two worker counts.
struct Rerun {
    const char* suite;
    size_t replicas;
    const char* overrides;
};

const std::vector<Rerun> kReruns{
    {"besq", 500, ""},
    {"metric-axioms", 0, "pairs=50\ntriples=200\n"},
    {"entrance-law", 500, "lmb_draws=2000\n"},
    {"kernel-vs-path", 200, "levels=0.25\n"},
    {"crp-limit", 100, "customers=200\nburn_in=5\noracle=2000\n"},
    {"ekp-generator", 200, "extras=false\n"},
};

void print_failures(const SuiteResult& r) {
    for (const auto& rep : r.reports)
        if (!rep.pass)
            std::printf("    failed %s: %s=%.6g > %.6g (n=%llu) %s\n", rep.id.c_str(), rep.statistic.c_str(), rep.value,
                        rep.threshold, (unsigned long long)rep.n, rep.note.c_str());
}

bool run_criterion(const Criterion& c, uint64_t seed, int workers_hi) {
    if (c.suite) {
        SuiteConfig sc;
        sc.suite = c.suite;
        sc.seed = seed;
        auto r = run_suite(sc);
        size_t ok = 0;
        for (const auto& rep : r.reports) ok += rep.pass;
        std::printf("criterion %2d %s: %s (%zu/%zu checks)\n", c.id, r.pass() ? "PASS" : "FAIL", c.title, ok,
                    r.reports.size());
        print_failures(r);
        std::fflush(stdout);
        return r.pass();
    }
    size_t same = 0;
    for (const auto& rr : kReruns) {
        SuiteConfig sc;
        sc.suite = rr.suite;
        sc.seed = seed;
        sc.replicas = rr.replicas;
        sc.overrides = Config::parse(rr.overrides);
        set_workers(1);
        auto a = run_suite(sc);
        set_workers(workers_hi);
        auto b = run_suite(sc);
        bool eq = suite_json(a).dump(2) == suite_json(b).dump(2) && suite_csv(a) == suite_csv(b);
        same += eq;
        if (!eq) std::printf("    %s differs between 1 and %d workers\n", rr.suite, workers_hi);
    }
    bool pass = same == kReruns.size();
    std::printf("criterion %2d %s: %s (%zu/%zu suites byte-identical, 1 vs %d workers)\n", c.id, pass ? "PASS" : "FAIL",
                c.title, same, kReruns.size(), workers_hi);
    std::fflush(stdout);
    return pass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    int only = 0, hi = 3;
    uint64_t seed = 42;
    app.add_option("--only", only, "Run a single criterion (1-12)")->check(CLI::Range(1, 12));
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--workers", hi, "Worker count compared against 1 for determinism")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    bool all = true;
    for (const auto& c : kCriteria) {
        if (only && c.id != only) continue;
        try {
            all = run_criterion(c, seed, hi) && all;
        } catch (const std::exception& e) {
            std::printf("criterion %2d FAIL: %s (error: %s)\n", c.id, c.title, e.what());
            all = false;
        }
    }
    return all ? 0 : 1;
}
