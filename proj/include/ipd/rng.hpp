#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace ipd {

// Philox4x32 with 10 rounds (Salmon et al. 2011).
inline std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> c, std::array<uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        uint64_t p0 = uint64_t(0xD2511F53u) * c[0];
        uint64_t p1 = uint64_t(0xCD9E8D57u) * c[2];
        c = {uint32_t(p1 >> 32) ^ c[1] ^ k[0], uint32_t(p1), uint32_t(p0 >> 32) ^ c[3] ^ k[1], uint32_t(p0)};
        k[0] += 0x9E3779B9u;
        k[1] += 0xBB67AE85u;
    }
    return c;
}

uint64_t splitmix64(uint64_t x);

// Counter-based stream keyed by (seed, stream). Draw i of a stream is a pure
// function of (seed, stream, i), so replicas never depend on scheduling.
class Rng {
public:
    using result_type = uint64_t;

    explicit Rng(uint64_t seed, uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }
    result_type operator()() {
        if (pos_ == kBuf) refill();
        return buf_[pos_++];
    }

    Rng child(uint64_t k) const;
    // Independent stream keyed by the next draw; advances this one.
    Rng split() { return child((*this)()); }

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }

    // open interval (0,1)
    double uniform() { return (double((*this)() >> 11) + 0.5) * 0x1.0p-53; }
    double normal();
    double exponential(double rate);
    double gamma(double shape, double scale);
    double beta(double a, double b);
    uint64_t poisson(double mean);
    uint64_t below(uint64_t n);

private:
    void refill();

    uint64_t seed_;
    uint64_t stream_;
    static constexpr int kBuf = 8;
    uint64_t counter_ = 0;
    uint64_t buf_[kBuf] = {};
    int pos_ = kBuf;
    std::normal_distribution<double> normal_;
};

}  // namespace ipd
