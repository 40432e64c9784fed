#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace dpplab {

// Philox4x32-10 counter-based generator (Salmon et al. 2011).
// key = (lo32(seed), hi32(seed)), counter = (block_lo, block_hi,
// stream_lo, stream_hi): the (seed, stream_id) pair fully determines the
// sequence and distinct stream ids give independent streams, independent
// of thread scheduling.
struct Philox4x32 {
    static std::array<uint32_t, 4> block(const std::array<uint32_t, 4>& ctr,
                                         const std::array<uint32_t, 2>& key);
};

class RngStream {
  public:
    RngStream(uint64_t seed, uint64_t stream_id)
        : seed_(seed), stream_(stream_id) {}

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_; }

    uint32_t next_u32();
    uint64_t next_u64();
    // 53-bit uniform in [0,1).
    double uniform();
    // uniform in (0,1], for logs.
    double uniform_pos();
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    // Box-Muller; second value buffered.
    double normal();
    // standard complex normal, E|Z|^2 = 1.
    std::complex<double> complex_normal();
    // exponential-race Poisson count, exact for lambda up to ~1e6.
    long poisson(double lambda);

    // Independent child stream for a tagged sub-computation.
    RngStream derived(uint64_t tag) const;

  private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t block_ = 0;
    std::array<uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;

    void refill();
};

}  // namespace dpplab
