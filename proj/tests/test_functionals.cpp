#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "dpplab/functionals.hpp"
#include "dpplab/samplers.hpp"

using namespace dpplab;

namespace {
PointPattern make_pattern(std::vector<Point> pts, Region win) {
    PointPattern p;
    p.points = std::move(pts);
    p.window = win;
    return p;
}
}  // namespace

TEST_CASE("nn ball score on a three-point fixture") {
    const ScoreFunction g = nn_ball_score(1.0);
    // isolated point, tight pair: scores 1, 0, 0
    const PointPattern pat =
        make_pattern({{0.0, 0.0}, {3.0, 0.0}, {3.5, 0.0}}, Disk{{0, 0}, 5.0});
    REQUIRE(g.score({0.0, 0.0}, pat) == 1);
    REQUIRE(g.score({3.0, 0.0}, pat) == 0);
    REQUIRE(g.score({3.5, 0.0}, pat) == 0);
    // the ball is closed: distance exactly v blocks
    const PointPattern touch = make_pattern({{0.0, 0.0}, {1.0, 0.0}}, Disk{{0, 0}, 5.0});
    REQUIRE(g.score({0.0, 0.0}, touch) == 0);
    REQUIRE(g.direction == ScoreFunction::Direction::decreasing);
    REQUIRE(g.deterministic_radius.has_value());
    REQUIRE(*g.deterministic_radius == 1.0);
    REQUIRE(g.nn_ball_radius.has_value());
    REQUIRE(g.kiss_alpha == Approx(16.0 / M_PI).epsilon(1e-12));
}

TEST_CASE("score localization: only the stabilization region matters") {
    const ScoreFunction g = nn_ball_score(0.8);
    RngStream rng(41, 0);
    for (int rep = 0; rep < 200; ++rep) {
        PointPattern pat;
        pat.window = Disk{{0, 0}, 6.0};
        const int n = 1 + (int)(rng.uniform() * 12);
        for (int i = 0; i < n; ++i)
            pat.points.push_back(uniform_in_region(pat.window, rng));
        const Point x = pat.points[0];
        const Region S = g.stabilization_region(x, pat);
        PointPattern inside = pat;
        inside.points.erase(
            std::remove_if(inside.points.begin(), inside.points.end(),
                           [&](const Point& p) { return !contains(S, p); }),
            inside.points.end());
        REQUIRE(g.score(x, pat) == g.score(x, inside));
    }
}

TEST_CASE("score is monotone decreasing under pattern growth") {
    const ScoreFunction g = nn_ball_score(1.2);
    RngStream rng(42, 0);
    for (int rep = 0; rep < 200; ++rep) {
        PointPattern small;
        small.window = Disk{{0, 0}, 5.0};
        const int n = 1 + (int)(rng.uniform() * 8);
        for (int i = 0; i < n; ++i)
            small.points.push_back(uniform_in_region(small.window, rng));
        PointPattern big = small;
        const int extra = 1 + (int)(rng.uniform() * 5);
        for (int i = 0; i < extra; ++i)
            big.points.push_back(uniform_in_region(big.window, rng));
        for (const Point& x : small.points)
            REQUIRE(g.score(x, big) <= g.score(x, small));
    }
}

TEST_CASE("retained points respect the packing bound") {
    const double v = 0.5;
    const ScoreFunction g = nn_ball_score(v);
    RngStream rng(43, 0);
    const Region box = Box{0, 0, 4, 4};
    for (int rep = 0; rep < 50; ++rep) {
        PointPattern pat;
        pat.window = box;
        for (int i = 0; i < 60; ++i) pat.points.push_back(uniform_in_region(box, rng));
        const ThinnedProcess xi = score_sum(pat, box, g);
        REQUIRE((double)xi.retained.points.size() < g.kiss_alpha * area(box));
    }
}

TEST_CASE("score_sum restricts to the window and keeps the parent") {
    const ScoreFunction g = nn_ball_score(1.0);
    const Region W = Disk{{0, 0}, 2.0};
    // point outside W shadows a point inside: counted for scores, not retained
    const PointPattern pat =
        make_pattern({{1.5, 0.0}, {2.4, 0.0}, {-1.0, 0.0}}, Disk{{0, 0}, 5.0});
    const ThinnedProcess xi = score_sum(pat, W, g);
    REQUIRE(xi.parent.points.size() == 3);
    REQUIRE(xi.retained.points.size() == 1);  // only (-1,0): (1.5,0) blocked by (2.4,0)
    REQUIRE(xi.retained.points[0].x == -1.0);
    for (const auto& p : xi.retained.points) REQUIRE(contains(W, p));
    REQUIRE(same_region(xi.window, W));
}

TEST_CASE("fast path agrees with the generic score path") {
    const double v = 0.9;
    const ScoreFunction fast = nn_ball_score(v);
    ScoreFunction generic = fast;
    generic.nn_ball_radius.reset();  // forces the direct per-point evaluation
    RngStream rng(44, 0);
    const Region W = Disk{{0, 0}, 4.0};
    for (int rep = 0; rep < 40; ++rep) {
        PointPattern pat;
        pat.window = Disk{{0, 0}, 6.0};
        const int n = (int)(rng.uniform() * 80);
        for (int i = 0; i < n; ++i)
            pat.points.push_back(uniform_in_region(pat.window, rng));
        const ThinnedProcess a = score_sum(pat, W, fast);
        const ThinnedProcess b = score_sum(pat, W, generic);
        REQUIRE(a.retained.points.size() == b.retained.points.size());
        for (std::size_t i = 0; i < a.retained.points.size(); ++i) {
            REQUIRE(a.retained.points[i].x == b.retained.points[i].x);
            REQUIRE(a.retained.points[i].y == b.retained.points[i].y);
        }
    }
}

TEST_CASE("scale_pattern divides points and window by n") {
    const ScoreFunction g = nn_ball_score(1.0);
    const Region W = Disk{{0, 0}, 10.0};
    const PointPattern pat = make_pattern({{5.0, -2.5}, {0.0, 0.0}}, W);
    const ThinnedProcess xi = score_sum(pat, W, g);
    const PointPattern scaled = scale_pattern(xi, 5.0);
    REQUIRE(same_region(scaled.window, Disk{{0, 0}, 2.0}));
    REQUIRE(scaled.points.size() == xi.retained.points.size());
    for (std::size_t i = 0; i < scaled.points.size(); ++i) {
        REQUIRE(scaled.points[i].x == Approx(xi.retained.points[i].x / 5.0));
        REQUIRE(scaled.points[i].y == Approx(xi.retained.points[i].y / 5.0));
    }
}

TEST_CASE("max_nn_statistic equals the brute force definition") {
    RngStream rng(45, 0);
    for (int rep = 0; rep < 60; ++rep) {
        PointPattern pat;
        const double n = 3.0 + 27.0 * rng.uniform();
        pat.window = Disk{{0, 0}, n + 4.0};
        const int m = 2 + (int)(rng.uniform() * 180);
        for (int i = 0; i < m; ++i)
            pat.points.push_back(uniform_in_region(pat.window, rng));
        double best = -1.0;
        for (std::size_t i = 0; i < pat.points.size(); ++i) {
            if (std::hypot(pat.points[i].x, pat.points[i].y) > n) continue;
            double nn = 1e300;
            for (std::size_t j = 0; j < pat.points.size(); ++j)
                if (j != i) nn = std::min(nn, dist(pat.points[i], pat.points[j]));
            best = std::max(best, M_PI * nn * nn);
        }
        if (best < 0) continue;  // no point inside B_n
        const double want = best / (2.0 * M_PI * std::sqrt(std::log(n)));
        REQUIRE(max_nn_statistic(pat, n) == Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("max_nn_statistic rejects undefined inputs") {
    PointPattern lone;
    lone.window = Disk{{0, 0}, 10.0};
    lone.points = {{0.0, 0.0}};
    REQUIRE_THROWS_AS(max_nn_statistic(lone, 5.0), undefined_statistic);
    PointPattern empty;
    empty.window = Disk{{0, 0}, 10.0};
    REQUIRE_THROWS_AS(max_nn_statistic(empty, 5.0), undefined_statistic);
}

TEST_CASE("count_statistics tabulates per pattern and region") {
    SampleBatch batch;
    batch.window = Disk{{0, 0}, 3.0};
    batch.patterns.push_back(make_pattern({{0.1, 0.0}, {2.0, 0.0}}, batch.window));
    batch.patterns.push_back(make_pattern({}, batch.window));
    batch.patterns.push_back(make_pattern({{0.0, 0.5}, {0.2, 0.0}, {-2.5, 0.1}}, batch.window));
    const std::vector<Region> regions = {Disk{{0, 0}, 1.0}, Annulus{{0, 0}, 1.5, 3.0}};
    const auto counts = count_statistics(batch, regions);
    REQUIRE(counts.size() == 3);
    REQUIRE(counts[0] == std::vector<long>{1, 1});
    REQUIRE(counts[1] == std::vector<long>{0, 0});
    REQUIRE(counts[2] == std::vector<long>{2, 1});
}

TEST_CASE("thinned jsonl round trip preserves retention flags") {
    namespace fs = std::filesystem;
    const ScoreFunction g = nn_ball_score(0.7);
    const Region W = Disk{{0, 0}, 3.0};
    std::vector<ThinnedProcess> batch;
    RngStream rng(46, 0);
    for (int i = 0; i < 5; ++i) {
        PointPattern pat;
        pat.window = Disk{{0, 0}, 4.0};
        const int n = (int)(rng.uniform() * 30);
        for (int j = 0; j < n; ++j)
            pat.points.push_back(uniform_in_region(pat.window, rng));
        batch.push_back(score_sum(pat, W, g));
    }
    const std::string path =
        (fs::temp_directory_path() / "dpplab_test_thinned.jsonl").string();
    write_thinned_jsonl(batch, 46, 0, path);
    std::ifstream is(path);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        const auto& pts = j.at("points");
        const auto& ret = j.at("retained");
        REQUIRE(pts.size() == batch[rows].parent.points.size());
        REQUIRE(ret.size() == pts.size());
        long kept = 0;
        for (const auto& b : ret) kept += b.get<int>();
        REQUIRE(kept == (long)batch[rows].retained.points.size());
        ++rows;
    }
    REQUIRE(rows == batch.size());
    fs::remove(path);
}
