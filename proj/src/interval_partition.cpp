#include "ipd/interval_partition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ipd {

namespace {
constexpr double kSumTol = 1e-9;
}

double IntervalPartition::block_sum() const {
    long double s = 0;
    for (double b : blocks) s += b;
    return double(s);
}

void IntervalPartition::validate() const {
    for (double b : blocks)
        if (!(b > 0) || !std::isfinite(b)) throw std::invalid_argument("IntervalPartition: block mass must be > 0");
    double s = block_sum();
    if (s > total_mass * (1 + kSumTol) + kSumTol)
        throw std::invalid_argument("IntervalPartition: block sum exceeds total mass");
    if (total_mass < 0) throw std::invalid_argument("IntervalPartition: negative total mass");
    if (!marks.empty()) {
        if (marks.size() != blocks.size()) throw std::invalid_argument("IntervalPartition: marks size mismatch");
        for (size_t i = 1; i < marks.size(); ++i)
            if (marks[i] < marks[i - 1]) throw std::invalid_argument("IntervalPartition: marks must be nondecreasing");
        if (!total_diversity) throw std::invalid_argument("IntervalPartition: marks without total diversity");
        if (*total_diversity < marks.back()) throw std::invalid_argument("IntervalPartition: total diversity < last mark");
    }
    if (blocks.empty() && !marks.empty()) throw std::invalid_argument("IntervalPartition: empty partition with marks");
}

IntervalPartition make_partition(std::vector<double> blocks) {
    IntervalPartition p;
    p.blocks = std::move(blocks);
    p.total_mass = p.block_sum();
    p.validate();
    return p;
}

IntervalPartition make_partition(std::vector<double> blocks, double total_mass) {
    IntervalPartition p;
    p.blocks = std::move(blocks);
    p.total_mass = total_mass;
    p.validate();
    return p;
}

IntervalPartition make_marked(std::vector<double> blocks, std::vector<double> marks, double total_diversity,
                              std::optional<double> total_mass) {
    IntervalPartition p;
    p.blocks = std::move(blocks);
    p.marks = std::move(marks);
    p.total_diversity = total_diversity;
    p.total_mass = total_mass ? *total_mass : p.block_sum();
    p.validate();
    return p;
}

IntervalPartition concatenate(const std::vector<IntervalPartition>& parts) {
    IntervalPartition out;
    bool all_marked = true;
    for (const auto& p : parts)
        if (!p.marked() && !(p.blocks.empty() && p.total_diversity)) all_marked = false;
    double div_offset = 0;
    size_t n = 0;
    for (const auto& p : parts) n += p.blocks.size();
    out.blocks.reserve(n);
    if (all_marked) out.marks.reserve(n);
    for (const auto& p : parts) {
        // dust of inner parts is carried in total_mass; positions of later
        // blocks are derived from masses only
        out.blocks.insert(out.blocks.end(), p.blocks.begin(), p.blocks.end());
        out.total_mass += p.total_mass;
        if (all_marked) {
            for (double m : p.marks) out.marks.push_back(m + div_offset);
            div_offset += p.total_diversity.value_or(0.0);
        }
    }
    if (all_marked && !parts.empty())
        out.total_diversity = div_offset;
    else
        out.marks.clear();
    return out;
}

IntervalPartition concatenate(const IntervalPartition& a, const IntervalPartition& b) {
    return concatenate(std::vector<IntervalPartition>{a, b});
}

IntervalPartition scale(double c, const IntervalPartition& beta) {
    if (!(c > 0) || !std::isfinite(c)) throw std::invalid_argument("scale: c must be > 0");
    IntervalPartition out = beta;
    for (double& b : out.blocks) b *= c;
    out.total_mass *= c;
    double rc = std::sqrt(c);
    for (double& m : out.marks) m *= rc;
    if (out.total_diversity) *out.total_diversity *= rc;
    return out;
}

IntervalPartition reverse(const IntervalPartition& beta) {
    IntervalPartition out;
    out.blocks.assign(beta.blocks.rbegin(), beta.blocks.rend());
    out.total_mass = beta.total_mass;
    if (beta.marked()) {
        double D = *beta.total_diversity;
        out.marks.reserve(beta.marks.size());
        for (auto it = beta.marks.rbegin(); it != beta.marks.rend(); ++it) out.marks.push_back(D - *it);
        out.total_diversity = D;
    }
    return out;
}

IntervalPartition normalize(const IntervalPartition& beta) {
    if (!(beta.total_mass > 0)) throw std::invalid_argument("normalize: empty partition");
    return scale(1.0 / beta.total_mass, beta);
}

RankedSimplexPoint ranked(const IntervalPartition& beta) {
    RankedSimplexPoint r;
    if (!(beta.total_mass > 0)) return r;
    r.values.reserve(beta.blocks.size());
    for (double b : beta.blocks) r.values.push_back(b / beta.total_mass);
    std::stable_sort(r.values.begin(), r.values.end(), std::greater<double>());
    return r;
}

std::vector<double> default_h_grid(double h_max, int points) {
    std::vector<double> g;
    double h = h_max;
    for (int i = 0; i < points; ++i, h *= 0.5) g.push_back(h);
    return g;
}

double diversity_estimate(const IntervalPartition& beta, double t, const std::vector<double>& h_grid) {
    if (t < 0 || t > beta.total_mass * (1 + 1e-12)) throw std::invalid_argument("diversity_estimate: t out of range");
    if (h_grid.size() < 3) throw std::invalid_argument("diversity_estimate: need >= 3 grid points");
    std::vector<double> left;
    double pos = 0;
    for (double b : beta.blocks) {
        pos += b;
        if (pos > t * (1 + 1e-15)) break;
        left.push_back(b);
    }
    std::sort(left.begin(), left.end());
    // N(h) ~ c + (D / sqrt(pi)) h^{-1/2}; D = sqrt(pi) * slope.
    std::vector<double> xs, ns;
    size_t count_first = 0;
    bool all_same = true;
    for (size_t k = 0; k < h_grid.size(); ++k) {
        double h = h_grid[k];
        size_t n = left.end() - std::upper_bound(left.begin(), left.end(), h);
        if (k == 0) count_first = n;
        if (n != count_first) all_same = false;
        xs.push_back(1.0 / std::sqrt(h));
        ns.push_back(double(n));
    }
    if (all_same) return 0.0;
    double mx = 0, mn = 0;
    for (size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        mn += ns[k];
    }
    mx /= xs.size();
    mn /= xs.size();
    double sxx = 0, sxn = 0;
    for (size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxn += (xs[k] - mx) * (ns[k] - mn);
    }
    return std::sqrt(M_PI) * sxn / sxx;
}

double diversity_estimate(const IntervalPartition& beta, double t) {
    double hmax = 1e-2 * std::max(beta.total_mass, 1e-300);
    return diversity_estimate(beta, t, default_h_grid(hmax));
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string to_csv(const IntervalPartition& beta) {
    std::ostringstream os;
    os << "index,left,right,mass,div_mark\n";
    long double pos = 0;
    for (size_t i = 0; i < beta.blocks.size(); ++i) {
        double l = double(pos);
        pos += beta.blocks[i];
        os << i << ',' << fmt17(l) << ',' << fmt17(double(pos)) << ',' << fmt17(beta.blocks[i]) << ',';
        if (beta.marked()) os << fmt17(beta.marks[i]);
        os << '\n';
    }
    return os.str();
}

namespace {
// nlohmann prints doubles with round-trip precision; wrap as raw strings of
// 17 digits to keep the format fixed.
nlohmann::ordered_json num(double x) { return nlohmann::ordered_json::parse(fmt17(x)); }
}  // namespace

nlohmann::ordered_json to_json(const IntervalPartition& beta) {
    nlohmann::ordered_json j;
    j["blocks"] = nlohmann::ordered_json::array();
    for (double b : beta.blocks) j["blocks"].push_back(num(b));
    j["total_mass"] = num(beta.total_mass);
    j["marks"] = nlohmann::ordered_json::array();
    if (beta.marked())
        for (double m : beta.marks) j["marks"].push_back(num(m));
    if (beta.total_diversity)
        j["total_diversity"] = num(*beta.total_diversity);
    else
        j["total_diversity"] = nullptr;
    return j;
}

IntervalPartition partition_from_json(const nlohmann::json& j) {
    IntervalPartition p;
    p.blocks = j.at("blocks").get<std::vector<double>>();
    p.total_mass = j.contains("total_mass") ? j.at("total_mass").get<double>() : p.block_sum();
    if (j.contains("marks")) p.marks = j.at("marks").get<std::vector<double>>();
    if (j.contains("total_diversity") && !j.at("total_diversity").is_null())
        p.total_diversity = j.at("total_diversity").get<double>();
    if (!p.total_diversity) p.marks.clear();
    p.validate();
    return p;
}

}  // namespace ipd
