#include "ipd/rng.hpp"

#include <cmath>

namespace ipd {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

Rng::Rng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

void Rng::refill() {
    // four consecutive counters per refill; draw i is block i/2 of the stream
    const std::array<uint32_t, 2> key = {uint32_t(seed_), uint32_t(seed_ >> 32)};
    for (int j = 0; j < kBuf / 2; ++j) {
        uint64_t c = counter_ + uint64_t(j);
        auto out = philox4x32({uint32_t(c), uint32_t(c >> 32), uint32_t(stream_), uint32_t(stream_ >> 32)}, key);
        buf_[2 * j] = (uint64_t(out[1]) << 32) | out[0];
        buf_[2 * j + 1] = (uint64_t(out[3]) << 32) | out[2];
    }
    counter_ += kBuf / 2;
    pos_ = 0;
}

Rng Rng::child(uint64_t k) const {
    return Rng(seed_, splitmix64(stream_ ^ splitmix64(k + 0x632BE59BD9B4E019ull)));
}

double Rng::normal() { return normal_(*this); }

double Rng::exponential(double rate) { return -std::log(uniform()) / rate; }

double Rng::gamma(double shape, double scale) {
    std::gamma_distribution<double> g(shape, scale);
    return g(*this);
}

double Rng::beta(double a, double b) {
    double x = gamma(a, 1.0);
    double y = gamma(b, 1.0);
    return x / (x + y);
}

uint64_t Rng::poisson(double mean) {
    if (mean <= 0) return 0;
    std::poisson_distribution<uint64_t> p(mean);
    return p(*this);
}

uint64_t Rng::below(uint64_t n) {
    // Lemire's multiply-shift with rejection
    uint64_t x = (*this)();
    __uint128_t m = __uint128_t(x) * n;
    uint64_t l = uint64_t(m);
    if (l < n) {
        uint64_t t = -n % n;
        while (l < t) {
            x = (*this)();
            m = __uint128_t(x) * n;
            l = uint64_t(m);
        }
    }
    return uint64_t(m >> 64);
}

}  // namespace ipd
