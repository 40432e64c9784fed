#include "dpplab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "dpplab/serialize.hpp"

namespace dpplab {
namespace {

constexpr double kPi = 3.14159265358979323846;

bool same_point(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }

}  // namespace

ScoreFunction nn_ball_score(double v) {
    if (!(v > 0)) throw std::invalid_argument("nn_ball_score: v must be positive");
    ScoreFunction g;
    g.direction = ScoreFunction::Direction::decreasing;
    g.kiss_alpha = 16.0 / (kPi * v * v);
    g.deterministic_radius = v;
    g.nn_ball_radius = v;
    g.score = [v](const Point& x, const PointPattern& omega) -> int {
        const double v2 = v * v;
        for (const auto& y : omega.points) {
            if (same_point(x, y)) continue;
            if (dist2(x, y) <= v2) return 0;
        }
        return 1;
    };
    g.stabilization_region = [v](const Point& x, const PointPattern&) -> Region {
        return Disk{x, v};
    };
    return g;
}

ThinnedProcess score_sum(const PointPattern& omega, const Region& W, const ScoreFunction& g) {
    ThinnedProcess out;
    out.parent = omega;
    out.window = W;
    out.retained.window = W;
    if (g.nn_ball_radius) {
        const double v = *g.nn_ball_radius;
        NeighborGrid grid(omega.points, v);
        for (std::size_t i = 0; i < omega.points.size(); ++i) {
            const Point& x = omega.points[i];
            if (!contains(W, x)) continue;
            if (!grid.any_within(x, v, i)) out.retained.points.push_back(x);
        }
        return out;
    }
    for (const auto& x : omega.points) {
        if (!contains(W, x)) continue;
        if (g.score(x, omega)) out.retained.points.push_back(x);
    }
    return out;
}

PointPattern scale_pattern(const ThinnedProcess& xi, double n) {
    if (!(n > 0)) throw std::invalid_argument("scale_pattern: n must be positive");
    PointPattern out;
    out.window = scale_region(xi.window, 1.0 / n);
    out.points.reserve(xi.retained.points.size());
    for (const auto& p : xi.retained.points) out.points.push_back({p.x / n, p.y / n});
    return out;
}

double max_nn_statistic(const PointPattern& omega, double n) {
    if (omega.points.size() < 2)
        throw undefined_statistic("max_nn_statistic: needs at least 2 points");
    if (!(n > 1)) throw std::invalid_argument("max_nn_statistic: n must exceed 1");
    const double mean_spacing =
        std::sqrt(area(omega.window) / static_cast<double>(omega.points.size()));
    NeighborGrid grid(omega.points, std::clamp(mean_spacing, 0.25, 8.0));
    const double n2 = n * n;
    double max_area = 0.0;
    for (std::size_t i = 0; i < omega.points.size(); ++i) {
        const Point& x = omega.points[i];
        if (x.x * x.x + x.y * x.y > n2) continue;
        const double d = grid.nearest_neighbor_dist(i);
        max_area = std::max(max_area, kPi * d * d);
    }
    return max_area / (2.0 * kPi * std::sqrt(std::log(n)));
}

std::vector<std::vector<long>> count_statistics(const SampleBatch& batch,
                                                const std::vector<Region>& regions) {
    std::vector<std::vector<long>> counts(batch.patterns.size(),
                                          std::vector<long>(regions.size(), 0));
    for (std::size_t i = 0; i < batch.patterns.size(); ++i) {
        for (const auto& p : batch.patterns[i].points) {
            for (std::size_t r = 0; r < regions.size(); ++r) {
                if (contains(regions[r], p)) ++counts[i][r];
            }
        }
    }
    return counts;
}

void write_thinned_jsonl(const std::vector<ThinnedProcess>& batch, uint64_t seed,
                         uint64_t stream_base, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error("write_thinned_jsonl: cannot open " + tmp.string());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto& t = batch[i];
            nlohmann::ordered_json line;
            line["seed"] = seed;
            line["stream"] = stream_base + i;
            line["window"] = region_to_json(t.window);
            auto pts = nlohmann::ordered_json::array();
            auto flags = nlohmann::ordered_json::array();
            std::size_t k = 0;  // score_sum keeps retained in parent order
            for (const auto& p : t.parent.points) {
                pts.push_back({p.x, p.y});
                const bool hit = k < t.retained.points.size() &&
                                 same_point(p, t.retained.points[k]);
                if (hit) ++k;
                flags.push_back(hit ? 1 : 0);
            }
            line["points"] = std::move(pts);
            line["retained"] = std::move(flags);
            os << line.dump() << "\n";
        }
        if (!os) throw std::runtime_error("write_thinned_jsonl: write failed");
    }
    fs::rename(tmp, target);
}

}  // namespace dpplab
