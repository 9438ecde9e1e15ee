#include "ipd/kernel.hpp"

#include <algorithm>
#include <array>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "ipd/besq.hpp"
#include "ipd/numeric.hpp"

namespace ipd {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);
const double kSqrtPi = std::sqrt(kPi);
const double kSqrt2Pi = std::sqrt(2.0 * kPi);

double need(const std::map<std::string, double>& p, const std::string& k) {
    auto it = p.find(k);
    if (it == p.end()) throw std::invalid_argument("closed_form: missing parameter " + k);
    return it->second;
}

double positive(const std::map<std::string, double>& p, const std::string& k) {
    double v = need(p, k);
    if (!(v > 0)) throw std::invalid_argument("closed_form: parameter " + k + " must be positive");
    return v;
}

// log(1 - cosh s + s sinh s)
double log_g(double s) {
    if (s < 0.1) {
        double s2 = s * s;
        return std::log(s2 * (0.5 + s2 * (1.0 / 8 + s2 / 144)));
    }
    if (s > 30) return s + std::log((s - 1) / 2);
    return std::log(1 - std::cosh(s) + s * std::sinh(s));
}

// log(e^x - 1)
double log_expm1(double x) { return x > 30 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x)); }

double lmb_log_density_unit(double b, double r) {
    // y = 1
    return -0.5 * std::log(2 * kPi) - 1.5 * std::log(b) - b / 2 - log_expm1(r / 2) + log_g(std::sqrt(r * b));
}

// Inverse CDF table of the leftmost block law at y = 1 for m0 = r.
struct LmbTable {
    // log-spaced below `split`, linear above; the linear part resolves the
    // bulk near r, whose width is O(sqrt r)
    std::vector<double> b;
    std::vector<double> cdf;
    size_t n_log = 0;

    explicit LmbTable(double r) {
        constexpr int n1 = 1024, n2 = 4096;
        const double lo = 1e-8;
        const double split = std::max(1.0, r - 40 * std::sqrt(r) - 40);
        const double hi = std::max(1e3, r + 60 * std::sqrt(r) + 60);
        auto f = [&](double x) { return std::exp(lmb_log_density_unit(x, r)); };
        // density ~ C b^{-1/2} near 0
        const double c = r / (2 * kSqrt2Pi * std::expm1(r / 2));
        double acc = 2 * c * std::sqrt(lo);
        b.push_back(lo);
        cdf.push_back(acc);
        const double l0 = std::log(lo), du = (std::log(split) - l0) / (n1 - 1);
        auto h = [&](double u) { return f(std::exp(u)) * std::exp(u); };
        double prev = h(l0);
        for (int i = 1; i < n1; ++i) {
            double u = l0 + du * i, cur = h(u);
            acc += du / 6 * (prev + 4 * h(u - du / 2) + cur);
            b.push_back(std::exp(u));
            cdf.push_back(acc);
            prev = cur;
        }
        n_log = b.size();
        const double dx = (hi - split) / n2;
        prev = f(split);
        for (int i = 1; i <= n2; ++i) {
            double x = split + dx * i, cur = f(x);
            acc += dx / 6 * (prev + 4 * f(x - dx / 2) + cur);
            b.push_back(x);
            cdf.push_back(acc);
            prev = cur;
        }
        for (double& v : cdf) v /= acc;
    }

    double quantile_log(double u) const {
        if (u <= cdf.front()) {
            // CDF grows like b^{1/2} below the grid
            return std::log(b.front()) + 2 * std::log(std::max(u, 1e-300) / cdf.front());
        }
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) return std::log(b.back());
        size_t i = size_t(it - cdf.begin());
        double f0 = cdf[i - 1], f1 = cdf[i];
        double w = f1 > f0 ? (u - f0) / (f1 - f0) : 0.0;
        if (i < n_log) return std::log(b[i - 1]) + w * (std::log(b[i]) - std::log(b[i - 1]));
        return std::log(b[i - 1] + w * (b[i] - b[i - 1]));
    }
};

// Tables on a log grid of r, 64 per decade over [1e-4, 1e5], built on demand.
class LmbGrid {
public:
    static constexpr double kLo = 1e-4;
    static constexpr double kHi = 1e5;
    static constexpr int kPerDecade = 64;
    static constexpr int kCount = 9 * kPerDecade + 1;

    static LmbGrid& instance() {
        static LmbGrid g;
        return g;
    }

    const LmbTable& table(int i) {
        std::call_once(once_[size_t(i)], [&] {
            tables_[size_t(i)] = std::make_unique<LmbTable>(kLo * std::pow(10.0, double(i) / kPerDecade));
        });
        return *tables_[size_t(i)];
    }

    // log of the u-quantile at y = 1
    double quantile_log(double r, double u) {
        double x = std::log10(r / kLo) * kPerDecade;
        int i = std::clamp(int(std::floor(x)), 0, kCount - 2);
        double w = x - i;
        if (w < 1e-12) return table(i).quantile_log(u);
        double q0 = table(i).quantile_log(u), q1 = table(i + 1).quantile_log(u);
        return q0 + w * (q1 - q0);
    }

private:
    std::array<std::once_flag, kCount> once_;
    std::array<std::unique_ptr<LmbTable>, kCount> tables_;
};

}  // namespace

std::string kind_name(FormKind k) {
    switch (k) {
        case FormKind::Density: return "density";
        case FormKind::Cdf: return "cdf";
        case FormKind::Tail: return "tail";
        case FormKind::Laplace: return "laplace";
        case FormKind::Exponent: return "exponent";
        case FormKind::LevyDensity: return "levy_density";
    }
    return "?";
}

double psi(double lambda) { return std::sqrt(2 / kPi) * std::pow(lambda, 1.5); }
double psi_inverse(double theta) { return std::cbrt(kPi / 2) * std::pow(theta, 2.0 / 3.0); }
double inverse_local_time_exponent(double theta) { return 3 * std::cbrt(theta / (4 * kPi)); }
double phi_y(double lambda, double y) { return std::sqrt(lambda + 1 / (2 * y)) - std::sqrt(1 / (2 * y)); }

double lmb_density(double b, double a, double y) {
    if (b <= 0) return 0.0;
    return std::exp(lmb_log_density_unit(b / y, a / y)) / y;
}

double lmb_laplace(double lambda, double a, double y) {
    double k = 2 * y * lambda + 1;
    return std::sqrt(k) * (std::exp(-lambda * a / k) - std::exp(-a / (2 * y))) / -std::expm1(-a / (2 * y));
}

double sample_lmb(double a, double y, Rng& rng) {
    if (!(a > 0) || !(y > 0)) throw std::invalid_argument("sample_lmb: a and y must be positive");
    double r = a / y;
    double u = rng.uniform();
    if (r < LmbGrid::kLo) return y * rng.gamma(0.5, 2.0);
    if (r > LmbGrid::kHi) return y * std::exp(LmbTable(r).quantile_log(u));
    return y * std::exp(LmbGrid::instance().quantile_log(r, u));
}

double besq0_density(double b, double a, double y) {
    if (b <= 0) return 0.0;
    double s = std::sqrt(a * b) / y;
    if (s > 500) {
        // I_1(s) ~ e^s / sqrt(2 pi s) (1 - 3/8s - 15/128s^2)
        return std::exp(std::log(std::sqrt(a / b) / (2 * y)) - (a + b) / (2 * y) + s) / std::sqrt(2 * kPi * s) *
               (1 - 3 / (8 * s) - 15 / (128 * s * s));
    }
    return std::sqrt(a / b) / (2 * y) * std::exp(-(a + b) / (2 * y)) * bessel_i1(s);
}

double besq0_cdf(double b, double a, double y) {
    double mu = a / (2 * y);
    if (b <= 0) return b < 0 ? 0.0 : std::exp(-mu);
    // Poisson(mu) mixture of Gamma(n, scale 2y)
    double total = 0;
    int n0 = std::max(1, int(mu));
    auto term = [&](int n) { return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0)) * gamma_cdf(b, n, 1 / (2 * y)); };
    for (int n = n0; n >= 1; --n) {
        double t = term(n);
        total += t;
        if (n < n0 - 10 && t < 1e-18) break;
    }
    for (int n = n0 + 1;; ++n) {
        double w = std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
        total += w * gamma_cdf(b, n, 1 / (2 * y));
        if (n > mu + 10 && w < 1e-18) break;
    }
    return std::exp(-mu) + total;
}

ClosedForm closed_form(const std::string& name, const std::map<std::string, double>& params) {
    ClosedForm c;
    c.name = name;
    c.params = params;
    if (name == "psi") {
        c.kind = FormKind::Exponent;
        c.f = psi;
    } else if (name == "psi_inverse") {
        c.kind = FormKind::Exponent;
        c.f = psi_inverse;
    } else if (name == "hitting_time_laplace") {
        double y = positive(params, "y");
        c.kind = FormKind::Laplace;
        c.f = [y](double th) { return std::exp(-y * psi_inverse(th)); };
    } else if (name == "inverse_local_time_exponent") {
        c.kind = FormKind::Exponent;
        c.f = inverse_local_time_exponent;
    } else if (name == "aggregate_mass_exponent") {
        c.kind = FormKind::Exponent;
        c.f = [](double l) { return std::sqrt(l); };
    } else if (name == "phi_y") {
        double y = positive(params, "y");
        c.kind = FormKind::Exponent;
        c.f = [y](double l) { return phi_y(l, y); };
    } else if (name == "levy_pi_y") {
        double y = positive(params, "y");
        c.kind = FormKind::LevyDensity;
        c.f = [y](double x) { return x > 0 ? std::pow(x, -1.5) * std::exp(-x / (2 * y)) / (2 * kSqrtPi) : 0.0; };
    } else if (name == "nu_tail_lifetime") {
        c.kind = FormKind::Tail;
        c.f = nu_tail_lifetime;
    } else if (name == "nu_tail_amplitude") {
        c.kind = FormKind::Tail;
        c.f = nu_tail_amplitude;
    } else if (name == "nu_levy_density") {
        c.kind = FormKind::LevyDensity;
        c.f = nu_levy_density;
    } else if (name == "absorption_time_cdf") {
        double a = positive(params, "a");
        c.kind = FormKind::Cdf;
        c.f = [a](double t) { return inverse_gamma_cdf(t, 1.5, a / 2); };
    } else if (name == "clade_mass_tail") {
        c.kind = FormKind::Tail;
        c.f = [](double a) { return a > 0 ? 1 / (kSqrtPi * std::sqrt(a)) : INFINITY; };
    } else if (name == "clade_lifetime_tail") {
        c.kind = FormKind::Tail;
        c.f = [](double z) { return z > 0 ? 1 / (kSqrt2 * std::sqrt(z)) : INFINITY; };
    } else if (name == "clade_overshoot_given_mass") {
        double a = positive(params, "a");
        c.kind = FormKind::Density;
        c.f = [a](double y) {
            return y > 0 ? std::pow(a, 1.5) / (kSqrt2Pi * std::pow(y, 2.5)) * std::exp(-a / (2 * y)) : 0.0;
        };
    } else if (name == "clade_lifetime_given_mass") {
        double a = positive(params, "a");
        c.kind = FormKind::Cdf;
        c.f = [a](double z) { return z > 0 ? std::exp(-a / (2 * z)) : 0.0; };
    } else if (name == "clade_mass_given_overshoot") {
        double y = positive(params, "y");
        c.kind = FormKind::Cdf;
        c.f = [y](double a) { return a > 0 ? -std::expm1(-a / (2 * y)) : 0.0; };
    } else if (name == "clade_lifetime_given_overshoot") {
        double y = positive(params, "y");
        c.kind = FormKind::Cdf;
        c.lo = y;
        c.f = [y](double z) { return z >= y ? std::sqrt((z - y) / z) : 0.0; };
    } else if (name == "clade_mass_given_lifetime") {
        double z = positive(params, "z");
        c.kind = FormKind::Density;
        c.f = [z](double a) {
            return a > 0 ? std::sqrt(z) / (kSqrt2Pi * std::pow(a, 1.5)) * -std::expm1(-a / (2 * z)) : 0.0;
        };
    } else if (name == "clade_length_tail") {
        c.kind = FormKind::Tail;
        double k = 3 / (std::cbrt(4.0) * std::cbrt(kPi) * std::tgamma(2.0 / 3.0));
        c.f = [k](double x) { return x > 0 ? k * std::cbrt(1 / x) : INFINITY; };
    } else if (name == "clade_jump_tail") {
        c.kind = FormKind::Tail;
        c.f = [](double y) { return y > 0 ? 3 / (kPi * kSqrt2 * std::sqrt(y)) : INFINITY; };
    } else if (name == "clade_overshoot_tail") {
        c.kind = FormKind::Tail;
        c.f = [](double y) { return y > 0 ? kSqrt2 / (kPi * std::sqrt(y)) : INFINITY; };
    } else if (name == "lmb_density") {
        double a = positive(params, "a"), y = positive(params, "y");
        c.kind = FormKind::Density;
        c.f = [a, y](double b) { return lmb_density(b, a, y); };
    } else if (name == "lmb_laplace") {
        double a = positive(params, "a"), y = positive(params, "y");
        c.kind = FormKind::Laplace;
        c.f = [a, y](double l) { return lmb_laplace(l, a, y); };
    } else if (name == "survival") {
        double a = positive(params, "a");
        c.kind = FormKind::Tail;
        c.f = [a](double y) { return y > 0 ? -std::expm1(-a / (2 * y)) : 0.0; };
    } else if (name == "besq0_density") {
        double a = positive(params, "a"), y = positive(params, "y");
        c.kind = FormKind::Density;
        c.atom = std::exp(-a / (2 * y));
        c.f = [a, y](double b) { return besq0_density(b, a, y); };
    } else if (name == "besq0_cdf") {
        double a = positive(params, "a"), y = positive(params, "y");
        c.kind = FormKind::Cdf;
        c.f = [a, y](double b) { return besq0_cdf(b, a, y); };
    } else if (name == "q1_density") {
        double y = positive(params, "y");
        c.kind = FormKind::Density;
        c.f = [y](double b) { return b > 0 ? std::exp(-b / (2 * y)) / std::sqrt(2 * kPi * y * b) : 0.0; };
    } else if (name == "q1_cdf") {
        double y = positive(params, "y");
        c.kind = FormKind::Cdf;
        c.f = [y](double b) { return gamma_cdf(b, 0.5, 1 / (2 * y)); };
    } else {
        throw std::invalid_argument("closed_form: unknown name " + name);
    }
    return c;
}

std::vector<std::string> closed_form_names() {
    return {"psi",
            "psi_inverse",
            "hitting_time_laplace",
            "inverse_local_time_exponent",
            "aggregate_mass_exponent",
            "phi_y",
            "levy_pi_y",
            "nu_tail_lifetime",
            "nu_tail_amplitude",
            "nu_levy_density",
            "absorption_time_cdf",
            "clade_mass_tail",
            "clade_lifetime_tail",
            "clade_overshoot_given_mass",
            "clade_lifetime_given_mass",
            "clade_mass_given_overshoot",
            "clade_lifetime_given_overshoot",
            "clade_mass_given_lifetime",
            "clade_length_tail",
            "clade_jump_tail",
            "clade_overshoot_tail",
            "lmb_density",
            "lmb_laplace",
            "survival",
            "besq0_density",
            "besq0_cdf",
            "q1_density",
            "q1_cdf"};
}

double small_jump_mass_rate(double y, double eps) {
    // (1/2 sqrt pi) int_0^eps x^{-1/2} e^{-x/2y} dx
    return std::sqrt(2 * y) / 2 * gamma_cdf(eps, 0.5, 1 / (2 * y));
}

IntervalPartition sample_ladder(double s, double y, Rng& rng, const KernelParams& p) {
    // proposals from the untilted measure above eps, thinned by e^{-x/2y}
    double rate = 1 / (kSqrtPi * std::sqrt(p.eps));
    uint64_t n = rng.poisson(rate * s);
    std::vector<std::pair<double, double>> jumps;
    jumps.reserve(size_t(double(n) * 0.9) + 4);
    for (uint64_t i = 0; i < n; ++i) {
        double t = s * rng.uniform();
        double u = rng.uniform();
        double x = p.eps / (u * u);
        if (rng.uniform() < std::exp(-x / (2 * y))) jumps.emplace_back(t, x);
    }
    std::sort(jumps.begin(), jumps.end());
    std::vector<double> blocks, marks;
    blocks.reserve(jumps.size());
    marks.reserve(jumps.size());
    double sum = 0;
    for (auto& [t, x] : jumps) {
        marks.push_back(t);
        blocks.push_back(x);
        sum += x;
    }
    return make_marked(std::move(blocks), std::move(marks), s, sum + s * small_jump_mass_rate(y, p.eps));
}

IntervalPartition sample_entrance_type1(double a, double y, Rng& rng, const KernelParams& p) {
    if (!(a > 0) || !(y > 0)) throw std::invalid_argument("sample_entrance_type1: a and y must be positive");
    if (rng.uniform() < std::exp(-a / (2 * y))) return make_marked({}, {}, 0.0, 0.0);
    double lead = sample_lmb(a, y, rng);
    double s = rng.exponential(1 / std::sqrt(2 * y));
    IntervalPartition rest = sample_ladder(s, y, rng, p);
    return concatenate(make_marked({lead}, {0.0}, 0.0), rest);
}

IntervalPartition sample_kernel_type1(const IntervalPartition& beta, double y, Rng& rng, const KernelParams& p) {
    std::vector<IntervalPartition> parts;
    parts.reserve(beta.size() + 1);
    const Rng base = rng.split();
    for (size_t i = 0; i < beta.size(); ++i) {
        Rng r = base.child(i + 1);
        parts.push_back(sample_entrance_type1(beta.blocks[i], y, r, p));
    }
    double dust = beta.dust();
    if (dust > 1e-15) {
        // dust evolves as BESQ(0) and carries no blocks at positive level
        Rng r = base.child(0);
        parts.push_back(make_marked({}, {}, 0.0, besq_step(0, dust, y, r)));
    }
    if (parts.empty()) return make_marked({}, {}, 0.0, 0.0);
    return concatenate(parts);
}

IntervalPartition sample_kernel_type0(const IntervalPartition& beta, double y, Rng& rng, const KernelParams& p) {
    Rng base = rng.split();
    Rng r = base.child(~uint64_t(0));
    double s = r.exponential(1 / std::sqrt(2 * y));
    IntervalPartition left = sample_ladder(s, y, r, p);
    return concatenate(left, sample_kernel_type1(beta, y, base, p));
}

std::string variant_name(PdipVariant v) { return v == PdipVariant::Half0 ? "half-zero" : "half-half"; }

PdipVariant parse_variant(const std::string& s) {
    if (s == "half-zero" || s == "0.5,0" || s == "1/2,0") return PdipVariant::Half0;
    if (s == "half-half" || s == "0.5,0.5" || s == "1/2,1/2") return PdipVariant::HalfHalf;
    throw std::invalid_argument("unknown PDIP variant: " + s);
}

IntervalPartition sample_pdip(PdipVariant v, Rng& rng, const PdipOptions& o) {
    double level = rng.exponential(o.rate);
    double eps = o.eps / o.rate;
    double rate = 1 / (kSqrtPi * std::sqrt(eps));
    double drift = std::sqrt(eps) / kSqrtPi;  // expected mass of jumps below eps per unit time
    std::vector<double> blocks, marks;
    double t = 0, y = 0, cross = 0;
    for (;;) {
        double dt = rng.exponential(rate);
        if (y + drift * dt >= level) {
            cross = t + (level - y) / drift;
            y = level;
            break;
        }
        t += dt;
        y += drift * dt;
        double u = rng.uniform();
        double x = eps / (u * u);
        if (y + x > level) {
            cross = t;
            break;
        }
        blocks.push_back(x);
        marks.push_back(t);
        y += x;
    }
    IntervalPartition beta = make_marked(std::move(blocks), std::move(marks), cross, y);
    if (v == PdipVariant::Half0 && level > y) beta = concatenate(make_marked({level - y}, {0.0}, 0.0), beta);
    if (!o.normalized) return beta;
    return normalize(beta);
}

}  // namespace ipd
