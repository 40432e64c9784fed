#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "dpplab/geometry.hpp"
#include "dpplab/samplers.hpp"

namespace dpplab {

struct undefined_statistic : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A {0,1} score g(x, omega) with its monotonicity direction, stabilization
// region S(x, omega), and a packing bound: sum of scores over omega cap A is
// below kiss_alpha * |A|.
struct ScoreFunction {
    enum class Direction { increasing, decreasing };

    std::function<int(const Point&, const PointPattern&)> score;
    Direction direction = Direction::decreasing;
    std::function<Region(const Point&, const PointPattern&)> stabilization_region;
    double kiss_alpha = 1.0;

    // Set when S(x, omega) = B_r(x) for every omega (deterministic stopping set).
    std::optional<double> deterministic_radius;
    // Set when the score is exactly the hard-exclusion indicator of radius r:
    // g(x, omega) = 1 iff omega has no point other than x within distance r.
    // Enables the grid fast path and exact zero short-circuits downstream.
    std::optional<double> nn_ball_radius;
};

// Score of x is 1 iff no other point lies in the closed ball B_v(x).
ScoreFunction nn_ball_score(double v);

// The thinned process: points of parent cap W carrying score 1 against the
// full parent pattern.
struct ThinnedProcess {
    PointPattern retained;
    PointPattern parent;
    Region window = Disk{{0, 0}, 1.0};
};

ThinnedProcess score_sum(const PointPattern& omega, const Region& W, const ScoreFunction& g);

// Retained points divided by n, window rescaled by 1/n.
PointPattern scale_pattern(const ThinnedProcess& xi, double n);

// (1 / (2 pi sqrt(log n))) * max over x in omega cap B_n of pi * d_nn(x)^2,
// where the nearest neighbor ranges over all of omega.
double max_nn_statistic(const PointPattern& omega, double n);

// Per-pattern, per-region counts.
std::vector<std::vector<long>> count_statistics(const SampleBatch& batch,
                                                const std::vector<Region>& regions);

// ThinnedProcess persistence: the batch JSONL schema plus a parallel
// "retained" 0/1 array aligned with "points".
void write_thinned_jsonl(const std::vector<ThinnedProcess>& batch, uint64_t seed,
                         uint64_t stream_base, const std::string& path);

}  // namespace dpplab
