#include "ipd/besq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>

#include <unistd.h>
#include <stdexcept>

namespace ipd {

double Spindle::value(double u) const {
    if (u < 0 || u > zeta || values.empty()) return 0.0;
    if (offsets.empty()) {
        double x = u / delta;
        size_t i = size_t(x);
        if (i + 1 >= values.size()) return values.back();
        double w = x - double(i);
        return values[i] + w * (values[i + 1] - values[i]);
    }
    auto it = std::upper_bound(offsets.begin(), offsets.end(), u);
    if (it == offsets.begin()) return values.front();
    if (it == offsets.end()) return values.back();
    size_t i = size_t(it - offsets.begin()) - 1;
    double w = (u - offsets[i]) / (offsets[i + 1] - offsets[i]);
    return values[i] + w * (values[i + 1] - values[i]);
}

Spindle Spindle::scaled(double c) const {
    if (!(c > 0)) throw std::invalid_argument("Spindle::scaled: c must be > 0");
    Spindle s = *this;
    s.zeta *= c;
    s.delta *= c;
    for (double& o : s.offsets) o *= c;
    for (double& v : s.values) v *= c;
    s.amplitude *= c;
    return s;
}

Spindle Spindle::reversed() const {
    Spindle s = *this;
    std::reverse(s.values.begin(), s.values.end());
    if (!s.offsets.empty()) {
        std::reverse(s.offsets.begin(), s.offsets.end());
        for (double& o : s.offsets) o = zeta - o;
    }
    return s;
}

namespace {

double euler_neg1(double x, double dt, Rng& rng) {
    x += -dt + 2.0 * std::sqrt(x * dt) * rng.normal();
    return x;
}

}  // namespace

double besq_step(int dimension, double x, double t, Rng& rng, double delta) {
    if (x < 0 || t < 0) throw std::invalid_argument("besq_step: negative x or t");
    if (t == 0) return x;
    switch (dimension) {
        case 0: {
            uint64_t n = rng.poisson(x / (2 * t));
            return n == 0 ? 0.0 : rng.gamma(double(n), 2 * t);
        }
        case 1: {
            double g = std::sqrt(x) + std::sqrt(t) * rng.normal();
            return g * g;
        }
        case 5: {
            double g = std::sqrt(x) + std::sqrt(t) * rng.normal();
            double s = g * g;
            for (int k = 0; k < 4; ++k) {
                double z = rng.normal();
                s += t * z * z;
            }
            return s;
        }
        case -1: {
            double left = t;
            while (left > 0 && x > kAbsorbTol) {
                double dt = std::min({delta, x / 10, left});
                x = euler_neg1(x, dt, rng);
                left -= dt;
            }
            return x > kAbsorbTol ? x : 0.0;
        }
        default:
            throw std::invalid_argument("besq_step: dimension must be -1, 0, 1 or 5");
    }
}

BesqPath besq_path(int dimension, double x, double horizon, double delta, Rng& rng) {
    if (x < 0 || horizon < 0 || !(delta > 0)) throw std::invalid_argument("besq_path: bad arguments");
    BesqPath p;
    p.dimension = dimension;
    p.start = x;
    p.delta = delta;
    p.times.push_back(0);
    p.values.push_back(x);
    size_t steps = size_t(std::ceil(horizon / delta - 1e-12));
    for (size_t k = 1; k <= steps; ++k) {
        double t = std::min(horizon, double(k) * delta);
        double dt = t - p.times.back();
        if (dimension <= 0 && x == 0) {
            p.absorbed = true;
        } else {
            x = besq_step(dimension, x, dt, rng, delta);
            if (dimension <= 0 && x == 0) p.absorbed = true;
        }
        p.times.push_back(t);
        p.values.push_back(x);
    }
    return p;
}

double besq_neg1_lifetime(double a, Rng& rng) {
    if (!(a > 0)) throw std::invalid_argument("besq_neg1_lifetime: a must be > 0");
    return (a / 2) / rng.gamma(1.5, 1.0);
}

Spindle besq_neg1_euler(double a, double delta, Rng& rng) {
    if (!(a > 0)) throw std::invalid_argument("besq_neg1_euler: a must be > 0");
    Spindle s;
    s.delta = delta;
    double t = 0, x = a;
    s.offsets.push_back(0);
    s.values.push_back(a);
    s.amplitude = a;
    while (x > kAbsorbTol) {
        double dt = std::min(delta, x / 10);
        x = euler_neg1(x, dt, rng);
        t += dt;
        if (x <= kAbsorbTol) x = 0;
        s.offsets.push_back(t);
        s.values.push_back(x);
        s.amplitude = std::max(s.amplitude, x);
    }
    s.zeta = t;
    return s;
}

double besq_neg1_euler_lifetime(double a, double delta, Rng& rng) {
    if (!(a > 0)) throw std::invalid_argument("besq_neg1_euler_lifetime: a must be > 0");
    double t = 0, x = a;
    while (x > kAbsorbTol) {
        double dt = std::min(delta, x / 10);
        x = euler_neg1(x, dt, rng);
        t += dt;
    }
    return t;
}

namespace {

// BESQ(5) from 0 up to first passage of h, exact Gaussian steps refined
// near h. Appends knots; returns the elapsed time.
double besq5_to_level(double h, double delta, Rng& rng, std::vector<double>* off, std::vector<double>* val,
                      double* x_end = nullptr) {
    double t = 0, x = 0;
    const double floor_dt = 1e-9 * h;
    while (x < h) {
        double gap = h - x;
        double dt = std::min(delta, gap * gap / (16 * std::max(x, gap)));
        dt = std::max(dt, floor_dt);
        x = besq_step(5, x, dt, rng);
        t += dt;
        if (off) {
            off->push_back(t);
            val->push_back(x);
        }
    }
    if (x_end) *x_end = x;
    return t;
}

// Euler BESQ(-1) from x; gives up and returns -1 once the path is close
// enough to 0 early that reaching total lifetime `need` is out of reach.
double neg1_from(double x, double t0, double delta, double need, Rng& rng, std::vector<double>* off,
                 std::vector<double>* val) {
    double t = t0;
    while (x > kAbsorbTol) {
        double dt = std::min(delta, x / 10);
        x = euler_neg1(x, dt, rng);
        t += dt;
        if (x <= kAbsorbTol) x = 0;
        if (off) {
            off->push_back(t);
            val->push_back(x);
        }
        if (need > 0 && x < 1e-5 && t < 0.95 * need) return -1;
    }
    return t;
}

}  // namespace

Spindle sample_spindle_threshold(double h, double delta, Rng& rng) {
    if (!(h > 0)) throw std::invalid_argument("sample_spindle_threshold: h must be > 0");
    Spindle s;
    s.delta = delta;
    s.offsets.push_back(0);
    s.values.push_back(0);
    double t = besq5_to_level(h, delta, rng, &s.offsets, &s.values);
    s.zeta = neg1_from(s.values.back(), t, delta, 0, rng, &s.offsets, &s.values);
    s.amplitude = *std::max_element(s.values.begin(), s.values.end());
    return s;
}

double nu_tail_lifetime(double y) {
    if (!(y > 0)) throw std::invalid_argument("nu_tail_lifetime: argument must be > 0");
    return std::pow(y, -1.5) / (M_PI * std::sqrt(2.0));
}

double nu_tail_amplitude(double m) {
    if (!(m > 0)) throw std::invalid_argument("nu_tail_amplitude: argument must be > 0");
    return 3.0 / (2.0 * std::sqrt(M_PI)) * std::pow(m, -1.5);
}

double nu_levy_density(double x) {
    if (!(x > 0)) throw std::invalid_argument("nu_levy_density: argument must be > 0");
    return 3.0 / (2.0 * M_PI * std::sqrt(2.0)) * std::pow(x, -2.5);
}

SpindlePool::SpindlePool(const Params& p) : params_(p), grid_(p.grid) {
    if (p.size == 0) throw std::invalid_argument("SpindlePool: size must be > 0");
    if (p.grid < 3) throw std::invalid_argument("SpindlePool: grid too small");
    data_.assign(p.size * grid_, 0.0);
    amp_.assign(p.size, 0.0);
    const size_t batch = 8192;
    uint64_t next = 0;
    while (count_ < p.size) {
        std::vector<char> ok(batch, 0);
        std::vector<double> zeta(batch, 0.0);
        // cheap pass: decide acceptance of each candidate
#pragma omp parallel for schedule(dynamic, 64)
        for (long i = 0; i < long(batch); ++i) {
            Rng rng(p.seed, next + uint64_t(i));
            double xe = 0;
            double t = besq5_to_level(p.h, p.delta, rng, nullptr, nullptr, &xe);
            Rng tail = rng.child(1);
            double z = neg1_from(xe, t, p.delta, p.zeta_min, tail, nullptr, nullptr);
            if (z > p.zeta_min) {
                ok[i] = 1;
                zeta[i] = z;
            }
        }
        for (size_t i = 0; i < batch && count_ < p.size; ++i) {
            if (!ok[i]) continue;
            Rng r(p.seed, next + i);
            std::vector<double> off{0.0}, val{0.0};
            double t = besq5_to_level(p.h, p.delta, r, &off, &val);
            Rng tail = r.child(1);
            double z = neg1_from(val.back(), t, p.delta, 0, tail, &off, &val);
            double* f = data_.data() + count_ * grid_;
            size_t j = 0;
            double amp = 0;
            for (size_t k = 0; k < grid_; ++k) {
                double u = z * double(k) / double(grid_ - 1);
                while (j + 1 < off.size() && off[j + 1] < u) ++j;
                double v;
                if (j + 1 >= off.size())
                    v = val.back();
                else {
                    double w = (u - off[j]) / (off[j + 1] - off[j]);
                    v = val[j] + std::clamp(w, 0.0, 1.0) * (val[j + 1] - val[j]);
                }
                f[k] = v / z;
                amp = std::max(amp, f[k]);
            }
            f[0] = 0;
            f[grid_ - 1] = 0;
            amp_[count_] = amp;
            ++count_;
        }
        next += batch;
    }
    candidates_ = next;
}

Spindle SpindlePool::spindle(size_t k, double zeta) const {
    Spindle s;
    s.zeta = zeta;
    s.delta = zeta / double(grid_ - 1);
    s.values.assign(data_.begin() + k * grid_, data_.begin() + (k + 1) * grid_);
    for (double& v : s.values) v *= zeta;
    s.amplitude = amp_[k] * zeta;
    return s;
}

std::shared_ptr<const SpindlePool> SpindlePool::shared_default() {
    static std::once_flag once;
    static std::shared_ptr<const SpindlePool> pool;
    std::call_once(once, [] { pool = load_or_build(Params{}); });
    return pool;
}

namespace {

std::string cache_name(const SpindlePool::Params& p) {
    std::ostringstream os;
    os << "spindle_pool_" << p.size << '_' << p.grid << '_' << std::hexfloat << p.h << '_' << p.delta << '_'
       << p.zeta_min << std::dec << '_' << p.seed << ".bin";
    std::string s = os.str();
    for (char& c : s)
        if (c == '+' || c == '.') c = '_';
    return s;
}

}  // namespace

// Pools are pure functions of their parameters, so a directory named by
// IPD_CACHE_DIR may hold them between processes.
std::shared_ptr<const SpindlePool> SpindlePool::load_or_build(const Params& p) {
    const char* dir = std::getenv("IPD_CACHE_DIR");
    if (!dir || !*dir) return std::make_shared<const SpindlePool>(p);
    std::filesystem::path path = std::filesystem::path(dir) / cache_name(p);
    {
        std::ifstream in(path, std::ios::binary);
        if (in) {
            auto pool = std::shared_ptr<SpindlePool>(new SpindlePool());
            pool->params_ = p;
            pool->count_ = p.size;
            pool->grid_ = p.grid;
            pool->data_.resize(p.size * p.grid);
            pool->amp_.resize(p.size);
            in.read(reinterpret_cast<char*>(&pool->candidates_), sizeof(uint64_t));
            in.read(reinterpret_cast<char*>(pool->data_.data()), std::streamsize(pool->data_.size() * sizeof(double)));
            in.read(reinterpret_cast<char*>(pool->amp_.data()), std::streamsize(pool->amp_.size() * sizeof(double)));
            if (in) return pool;
        }
    }
    auto pool = std::make_shared<const SpindlePool>(p);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::filesystem::path tmp = path;
    tmp += ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary);
        out.write(reinterpret_cast<const char*>(&pool->candidates_), sizeof(uint64_t));
        out.write(reinterpret_cast<const char*>(pool->data_.data()), std::streamsize(pool->data_.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(pool->amp_.data()), std::streamsize(pool->amp_.size() * sizeof(double)));
    }
    std::filesystem::rename(tmp, path, ec);
    return pool;
}

Spindle sample_spindle_given_lifetime(double zeta, const SpindlePool& pool, Rng& rng) {
    if (!(zeta > 0)) throw std::invalid_argument("sample_spindle_given_lifetime: zeta must be > 0");
    if (pool.size() == 0) throw std::runtime_error("sample_spindle_given_lifetime: empty pool");
    return pool.spindle(rng.below(pool.size()), zeta);
}

}  // namespace ipd
