#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "dpplab/functionals.hpp"
#include "dpplab/kernels.hpp"

namespace dpplab {

struct invalid_regime : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct contract_violation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Bracket {
    double lower = 0.0;
    double upper = 0.0;
};

// P(no Ginibre point in B_r) = prod_{i>=1} Q(i, r^2), truncated in log space
// with a proven tail bound; bracket encloses the infinite product.
struct VoidProbability {
    double value = 1.0;
    double log_value = 0.0;
    Bracket bracket{1.0, 1.0};
};
VoidProbability void_probability(double r);

// e^{v^2} P(xi(B_v) = 0) = P(xi^{o!}(B_v) = 0); always <= 1.
double palm_void_probability(double v);
double log_palm_void_probability(double v);

// Solution of palm_void(v_n) = tau / n^2.
struct VnSolution {
    double n = 0.0;
    double tau = 0.0;
    double v_n = 0.0;
    double residual = 0.0;          // palm_void(v_n) - tau/n^2
    double asymptotic_ratio = 0.0;  // v_n^4 / (4 ln n)
};
VnSolution solve_vn(double n, double tau);

// exp(-r2 + k - k ln(k/r2)) for k < r2, else the trivial bound 1;
// dominates Q(k, r2).
double chernoff_gamma_tail(long k, double r2);

// log P(xi(B_v) <= 2) <= 4 ln v + sum_{k=3}^{floor(v^2)} (-v^2 + k - k ln(k/v^2)),
// with the asymptotic proxy -v^4/4 for comparison. Requires v^2 >= 4.
struct FewPointsBound {
    double log_bound = 0.0;
    double proxy = 0.0;
};
FewPointsBound few_points_log_bound(double v);

// C n^{epsilon - 1/16}; sets *vacuous when epsilon >= 1/16.
double theorem2_rate(double n, double epsilon, double C, bool* vacuous = nullptr);

struct TermEstimate {
    double value = 0.0;
    double se = 0.0;
};

struct BoundReport {
    double dtv_term = 0.0;
    double dtv_se = 0.0;
    TermEstimate E1, E2, E3;
    double F = 0.0;
    double c_constant = 1.0;
    double total = 0.0;
    double total_se = 0.0;
    long replicates = 0;
    uint64_t seed = 0;
    int quad_grid = 0;
    double quad_error = 0.0;  // grid-refinement shift of E2+E3 at fixed MC estimates
    double window_radius = 0.0, S_radius = 0.0, T_radius = 0.0;
    double score_mean = 0.0;  // pooled Palm estimate of E[g(x, xi^x)]
};

std::string bound_report_json(const BoundReport& r);
std::string bound_report_csv_header();
std::string bound_report_csv_row(const BoundReport& r);

struct TheoremOptions {
    int quad_grid = 6;          // outer midpoint resolution across the window
    long inner_replicates = 400;  // Palm draws per node (E2) / per radial knot (E3)
    int palm_grid_n = 48;       // Nystrom resolution for Palm windows
    double palm_tail_tol = 1e-4;
    double c_constant = 1.0;
    int e3_knots = 6;
    double palm_margin = 3.0;   // sampling margin beyond the score radius
};

// Theorem 2.1 terms for a monotone stabilizing score on W with localization
// ball S and interaction ball T (both centered at the origin, o in S subset T).
// target_intensity: constant Poisson intensity of M on W; nullopt matches M to
// the estimated intensity of the thinned process (dtv_term = 0 by construction).
// The sampled terms require a stationary kernel; W must be a disk.
BoundReport theorem_bound(const KernelSpec& K, const ScoreFunction& g, const Region& W,
                          const Disk& S, const Disk& T, std::optional<double> target_intensity,
                          uint64_t seed, const TheoremOptions& opt = {});

struct WitnessStat {
    std::string name;
    std::function<double(const PointPattern&)> fn;
};

// Counts on a dyadic family of disks and annuli, plus min(count, k), k = 1..3.
std::vector<WitnessStat> default_witness_family(const Region& window);

struct KrEstimate {
    double lower_bound = 0.0;  // max over witnesses of |mean gap| - 2 pooled SE, floored at 0
    double se = 0.0;           // pooled SE of the best witness
    std::string best_witness;
};

KrEstimate kr_witness(const SampleBatch& A, const SampleBatch& B,
                      const std::vector<WitnessStat>& tests);

}  // namespace dpplab
