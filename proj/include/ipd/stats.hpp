#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ipd {

struct StatReport {
    std::string id;
    std::string statistic;  // "ks" | "ks2" | "abs_error" | "rel_error" | "z"
    double value = 0;
    double threshold = 0;
    bool pass = false;
    uint64_t n = 0;
    uint64_t seed = 0;
    std::string note;
};

nlohmann::ordered_json to_json(const StatReport& r);

// Sup distance between the empirical CDF and a right-continuous reference.
// Atoms are handled by comparing the left limit as well.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);
double ks_distance_two_sample(std::vector<double> a, std::vector<double> b);

StatReport ks_test(const std::string& id, const std::vector<double>& samples,
                   const std::function<double(double)>& cdf, double threshold, uint64_t seed);
StatReport ks_two_sample(const std::string& id, const std::vector<double>& a, const std::vector<double>& b,
                         double threshold, uint64_t seed);

struct MeanSe {
    double mean = 0;
    double se = 0;
    uint64_t n = 0;
};
MeanSe mean_se(const std::vector<double>& x);

// Sample correlation; NaN when either series is constant or shorter than 2.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

// |mean - target| against k standard errors (plus an optional absolute allowance).
StatReport z_test(const std::string& id, const std::vector<double>& x, double target, double k, uint64_t seed,
                  double allowance = 0.0);
StatReport proportion_test(const std::string& id, uint64_t hits, uint64_t n, double p, double k, uint64_t seed);

// Empirical Laplace transforms at each lambda against a closed form; relative
// error of the transform itself.
std::vector<StatReport> laplace_check(const std::string& id, const std::vector<double>& samples,
                                      const std::vector<double>& lambdas,
                                      const std::function<double(double)>& closed_form, double rel_tol,
                                      uint64_t seed);

StatReport make_report(const std::string& id, const std::string& statistic, double value, double threshold,
                       uint64_t n, uint64_t seed, const std::string& note = "");

}  // namespace ipd
