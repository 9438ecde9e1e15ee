#include "ipd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/statistics/bivariate_statistics.hpp>

namespace ipd {

nlohmann::ordered_json to_json(const StatReport& r) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["statistic"] = r.statistic;
    j["value"] = r.value;
    j["threshold"] = r.threshold;
    j["pass"] = r.pass;
    j["n"] = r.n;
    j["seed"] = r.seed;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

StatReport make_report(const std::string& id, const std::string& statistic, double value, double threshold,
                       uint64_t n, uint64_t seed, const std::string& note) {
    StatReport r;
    r.id = id;
    r.statistic = statistic;
    r.value = value;
    r.threshold = threshold;
    r.pass = std::isfinite(value) && value <= threshold;
    r.n = n;
    r.seed = seed;
    r.note = note;
    return r;
}

double ks_distance(std::vector<double> s, const std::function<double(double)>& cdf) {
    if (s.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(s.begin(), s.end());
    const double n = double(s.size());
    double d = 0;
    size_t i = 0;
    while (i < s.size()) {
        size_t j = i;
        while (j < s.size() && s[j] == s[i]) ++j;
        double v = s[i];
        double below = double(i) / n, upto = double(j) / n;
        double f = cdf(v);
        double fl = cdf(std::nextafter(v, -std::numeric_limits<double>::infinity()));
        d = std::max({d, std::abs(upto - f), std::abs(below - fl)});
        i = j;
    }
    return d;
}

double ks_distance_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    size_t i = 0, j = 0;
    double d = 0;
    const double na = double(a.size()), nb = double(b.size());
    while (i < a.size() || j < b.size()) {
        double v;
        if (j == b.size() || (i < a.size() && a[i] <= b[j]))
            v = a[i];
        else
            v = b[j];
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(double(i) / na - double(j) / nb));
    }
    return d;
}

StatReport ks_test(const std::string& id, const std::vector<double>& samples,
                   const std::function<double(double)>& cdf, double threshold, uint64_t seed) {
    if (samples.size() < 100) throw std::invalid_argument("ks_test: need at least 100 samples");
    return make_report(id, "ks", ks_distance(samples, cdf), threshold, samples.size(), seed);
}

StatReport ks_two_sample(const std::string& id, const std::vector<double>& a, const std::vector<double>& b,
                         double threshold, uint64_t seed) {
    if (a.size() < 100 || b.size() < 100) throw std::invalid_argument("ks_two_sample: need at least 100 samples");
    return make_report(id, "ks2", ks_distance_two_sample(a, b), threshold, std::min(a.size(), b.size()), seed);
}

MeanSe mean_se(const std::vector<double>& x) {
    MeanSe m;
    m.n = x.size();
    if (x.empty()) return m;
    long double s = 0;
    for (double v : x) s += v;
    m.mean = double(s / x.size());
    if (x.size() > 1) {
        long double q = 0;
        for (double v : x) q += (v - m.mean) * (v - m.mean);
        m.se = std::sqrt(double(q / (x.size() - 1)) / double(x.size()));
    }
    return m;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
    if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return boost::math::statistics::correlation_coefficient(a, b);
}

StatReport z_test(const std::string& id, const std::vector<double>& x, double target, double k, uint64_t seed,
                  double allowance) {
    if (x.empty()) throw std::invalid_argument("z_test: empty sample");
    auto m = mean_se(x);
    double err = std::abs(m.mean - target);
    auto r = make_report(id, "abs_error", err, k * m.se + allowance, m.n, seed);
    r.note = "mean=" + std::to_string(m.mean) + " target=" + std::to_string(target) + " se=" + std::to_string(m.se);
    return r;
}

StatReport proportion_test(const std::string& id, uint64_t hits, uint64_t n, double p, double k, uint64_t seed) {
    if (n == 0) throw std::invalid_argument("proportion_test: empty sample");
    double ph = double(hits) / double(n);
    double se = std::sqrt(p * (1 - p) / double(n));
    auto r = make_report(id, "abs_error", std::abs(ph - p), k * se, n, seed);
    r.note = "observed=" + std::to_string(ph) + " target=" + std::to_string(p);
    return r;
}

std::vector<StatReport> laplace_check(const std::string& id, const std::vector<double>& samples,
                                      const std::vector<double>& lambdas,
                                      const std::function<double(double)>& closed_form, double rel_tol,
                                      uint64_t seed) {
    if (samples.empty()) throw std::invalid_argument("laplace_check: empty sample");
    std::vector<StatReport> out;
    for (double lam : lambdas) {
        long double s = 0;
        for (double v : samples) s += std::exp(-lam * v);
        double emp = double(s / samples.size());
        double ref = closed_form(lam);
        auto r = make_report(id + "@" + std::to_string(lam), "rel_error", std::abs(emp / ref - 1), rel_tol,
                             samples.size(), seed);
        r.note = "empirical=" + std::to_string(emp) + " closed_form=" + std::to_string(ref);
        out.push_back(r);
    }
    return out;
}

}  // namespace ipd
