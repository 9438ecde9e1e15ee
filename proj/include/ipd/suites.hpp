#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipd/config.hpp"
#include "ipd/evolve.hpp"
#include "ipd/interval_partition.hpp"
#include "ipd/kernel.hpp"
#include "ipd/rng.hpp"
#include "ipd/stats.hpp"

namespace ipd {

// Initial states: "empty", "explicit:0.5,0.3,0.2", "pdip:half-zero",
// "pdip:half-half", "exp-pdip:half-zero:<rate>".
IntervalPartition make_initial(const std::string& desc, Rng& rng, double pdip_eps = 1e-7);

EvolveParams evolve_params_from(const Config& c);

struct SuiteConfig {
    std::string suite;
    uint64_t seed = 42;
    size_t replicas = 0;  // 0: the suite default
    Config overrides;
};

struct RawSeries {
    std::string name;
    std::vector<double> values;
};

// Reported without a pass/fail verdict.
struct Exploratory {
    std::string id;
    std::string statistic;
    double value = 0;
    uint64_t n = 0;
};

struct SuiteResult {
    std::string suite;
    uint64_t seed = 0;
    std::vector<StatReport> reports;
    std::vector<Exploratory> exploratory;
    std::vector<RawSeries> raw;
    bool pass() const;
};

std::vector<std::string> suite_names();
SuiteResult run_suite(const SuiteConfig& c);

nlohmann::ordered_json suite_json(const SuiteResult& r);
std::string suite_csv(const SuiteResult& r);

}  // namespace ipd
