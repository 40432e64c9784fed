#pragma once

#include <atomic>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "dpplab/rng.hpp"
#include "dpplab/spectral.hpp"

namespace dpplab {

struct envelope_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SamplerOptions {
    double safety = 1.2;  // envelope headroom over grid-node density
    // Gram-Schmidt locality radius. The default (infinity) orthogonalizes each
    // accepted feature against every previous one, which is exact. Finite radii
    // bias the draw: window-restricted eigenfunctions are non-local along the
    // boundary band, so truncating by distance leaves percent-level density
    // artifacts that no geometric cutoff we tested removes.
    double r_ortho = std::numeric_limits<double>::infinity();
    // Envelope update locality radius. Skipping far grid nodes only leaves
    // their density estimates stale-high, so the envelope stays an upper
    // bound; this is a pure speed/acceptance-rate trade-off, never a bias.
    double r_env = 4.5;
    long max_rejects_per_stage = 100000;
    int min_grid_side = 16;
    int max_grid_side = 64;
};

struct SamplerDiagnostics {
    uint64_t proposals = 0;
    uint64_t accepts = 0;
    uint64_t bumps = 0;
    uint64_t reorths = 0;
    long max_stage_rejects = 0;
};

// One draw of the DPP with the basis's kernel (HKPV): Bernoulli eigenvalue
// selection, then sequential projection sampling with uniform-proposal
// rejection against an envelope tracking the grid maximum of the current
// conditional density.
PointPattern sample_dpp(const SpectralBasis& basis, RngStream& rng,
                        SamplerDiagnostics* diag = nullptr,
                        const SamplerOptions& opt = {});

// #{i >= 1 : X_i <= r} under Kostlan's law, as a sum of independent
// Bernoulli(1 - Q(i, r^2)); truncation tail below 1e-12.
long sample_kostlan_counts(double r, RngStream& rng);

// Nystrom basis of the (one- or two-point) reduced Palm kernel on the window.
SpectralBasis palm_basis(const KernelSpec& K, const std::vector<Point>& conditioning,
                         const Region& window, int grid_n, double tail_tol = 1e-6);

// Single reduced-Palm draw (conditioned points not included). Batch use
// should build palm_basis once and call sample_dpp.
PointPattern sample_palm(const KernelSpec& K, const std::vector<Point>& conditioning,
                         const Region& window, double tail_tol, RngStream& rng,
                         int grid_n = 64);

PointPattern sample_poisson(double intensity, const Region& window, RngStream& rng);

// One uniform point (polar inversion for disks/annuli, direct for boxes).
Point uniform_in_region(const Region& region, RngStream& rng);

// APPROXIMATE: eigenvalues of an N x N iid standard complex Gaussian matrix
// (bulk intensity 1/pi on B_sqrt(N)). Exploratory use only.
PointPattern sample_ginibre_ensemble(int N, RngStream& rng);

struct SampleBatch {
    std::vector<PointPattern> patterns;
    uint64_t seed = 0;
    uint64_t stream_base = 0;
    std::string sampler_tag;
    Region window = Disk{{0, 0}, 1.0};
};

// JSONL persistence, one pattern per line:
//   {"seed":..., "stream":..., "window":{...}, "points":[[x,y],...]}
// Writes are atomic (temp then rename); round trips are bit-exact.
void write_jsonl(const SampleBatch& batch, const std::string& path);
SampleBatch read_jsonl(const std::string& path);

int worker_count();

// Deterministic parallel replication: replicate i uses RngStream(seed,
// stream_base + i); results are collected by replicate index, so the
// outcome is independent of the worker count.
template <typename T, typename F>
std::vector<T> run_replicated(std::size_t replicates, uint64_t seed, uint64_t stream_base,
                              F&& body) {
    std::vector<T> results(replicates);
    const int workers = std::min<int>(worker_count(), static_cast<int>(replicates));
    if (workers <= 1) {
        for (std::size_t i = 0; i < replicates; ++i) {
            RngStream rng(seed, stream_base + i);
            results[i] = body(i, rng);
        }
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= replicates) break;
                    RngStream rng(seed, stream_base + i);
                    results[i] = body(i, rng);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

}  // namespace dpplab
