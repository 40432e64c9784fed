#include "dpplab/rng.hpp"

#include <stdexcept>

namespace dpplab {

namespace {
constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;
constexpr double kTwoPi = 6.283185307179586476925286766559;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
    const uint64_t p = static_cast<uint64_t>(a) * b;
    hi = static_cast<uint32_t>(p >> 32);
    lo = static_cast<uint32_t>(p);
}

inline uint64_t splitmix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace

std::array<uint32_t, 4> Philox4x32::block(const std::array<uint32_t, 4>& ctr,
                                          const std::array<uint32_t, 2>& key) {
    uint32_t x0 = ctr[0], x1 = ctr[1], x2 = ctr[2], x3 = ctr[3];
    uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
        uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, x0, hi0, lo0);
        mulhilo(kPhiloxM1, x2, hi1, lo1);
        const uint32_t y0 = hi1 ^ x1 ^ k0;
        const uint32_t y1 = lo1;
        const uint32_t y2 = hi0 ^ x3 ^ k1;
        const uint32_t y3 = lo0;
        x0 = y0; x1 = y1; x2 = y2; x3 = y3;
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return {x0, x1, x2, x3};
}

void RngStream::refill() {
    const std::array<uint32_t, 4> ctr = {
        static_cast<uint32_t>(block_), static_cast<uint32_t>(block_ >> 32),
        static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)};
    const std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed_),
                                         static_cast<uint32_t>(seed_ >> 32)};
    buf_ = Philox4x32::block(ctr, key);
    ++block_;
    buf_pos_ = 0;
}

uint32_t RngStream::next_u32() {
    if (buf_pos_ >= 4) refill();
    return buf_[buf_pos_++];
}

uint64_t RngStream::next_u64() {
    const uint64_t lo = next_u32();
    const uint64_t hi = next_u32();
    return lo | (hi << 32);
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_normal_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
}

std::complex<double> RngStream::complex_normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));  // already includes the 1/sqrt(2)
    return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
}

long RngStream::poisson(double lambda) {
    if (lambda < 0 || !std::isfinite(lambda)) throw std::invalid_argument("poisson: bad lambda");
    if (lambda > 1e6) throw std::invalid_argument("poisson: lambda too large for exact race");
    double acc = 0.0;
    long count = -1;
    while (acc <= lambda) {
        acc += -std::log(uniform_pos());
        ++count;
    }
    return count;
}

RngStream RngStream::derived(uint64_t tag) const {
    // Mix (stream, tag) into a fresh stream id; seed space stays shared.
    return RngStream(seed_, splitmix64(stream_ ^ splitmix64(tag ^ 0xA5B35705u)));
}

}  // namespace dpplab
