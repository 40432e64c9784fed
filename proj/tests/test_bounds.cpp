#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include "dpplab/bounds.hpp"
#include "dpplab/numerics.hpp"
#include "dpplab/samplers.hpp"

using namespace dpplab;

TEST_CASE("void probability reproduces fixed analytic values") {
    // mpmath, 30 digits
    REQUIRE(void_probability(0.5).value == Approx(0.756418443737).epsilon(1e-11));
    REQUIRE(void_probability(1.0).value == Approx(0.243147141611).epsilon(1e-11));
    REQUIRE(void_probability(1.5).value == Approx(0.0157881450504).epsilon(1e-11));
    REQUIRE(void_probability(0.0).value == 1.0);
}

TEST_CASE("void probability bracket encloses the value") {
    for (double r : {0.2, 0.5, 1.0, 1.7, 2.5, 4.0, 6.0}) {
        const VoidProbability v = void_probability(r);
        REQUIRE(v.bracket.lower <= v.value);
        REQUIRE(v.value <= v.bracket.upper);
        // directed rounding widens the bracket ~1 ulp per product factor, and
        // the factor count grows with r^2; 1e-9 covers r = 6 (few hundred ulps)
        REQUIRE(v.bracket.upper - v.bracket.lower < 1e-9 * std::max(v.value, 1e-300));
        REQUIRE(v.log_value == Approx(std::log(v.bracket.lower)).margin(1e-9));
        REQUIRE(v.value <= 1.0);
        REQUIRE(v.value > 0.0);
    }
    // strictly decreasing in r
    double prev = 1.0;
    for (double r : {0.3, 0.6, 1.0, 1.5, 2.2}) {
        const double cur = void_probability(r).value;
        REQUIRE(cur < prev);
        prev = cur;
    }
}

TEST_CASE("log void probability is usable far past linear underflow") {
    const VoidProbability v = void_probability(7.0);
    REQUIRE(std::isfinite(v.log_value));
    REQUIRE(v.log_value < -500.0);  // ~ -r^4/4
    REQUIRE(v.log_value == Approx(-0.25 * std::pow(7.0, 4.0)).epsilon(0.35));
}

TEST_CASE("palm void values and identity") {
    REQUIRE(palm_void_probability(0.8) == Approx(0.83715755207).epsilon(1e-10));
    REQUIRE(palm_void_probability(1.0) == Approx(0.660942456684).epsilon(1e-10));
    REQUIRE(palm_void_probability(1.2) == Approx(0.439298061954).epsilon(1e-10));
    REQUIRE(palm_void_probability(1.5) == Approx(0.149793749584776274).epsilon(1e-10));
    // dual route: e^{v^2} P(xi(B_v)=0), Palm conditioning removes the i=1 factor
    for (double v : {0.4, 0.9, 1.3, 2.0, 2.8}) {
        const double lhs = palm_void_probability(v);
        const double rhs = std::exp(v * v) * void_probability(v).value;
        REQUIRE(lhs == Approx(rhs).epsilon(1e-9));
        REQUIRE(lhs <= 1.0);
        REQUIRE(log_palm_void_probability(v) == Approx(std::log(lhs)).margin(1e-9));
    }
}

TEST_CASE("bkpv log asymptotics ratios") {
    // (1/r^4) log void(r), mpmath
    const double want[] = {-0.4267852586, -0.3599905993, -0.3262191956, -0.3064761397};
    const double rs[] = {3.0, 4.0, 5.0, 6.0};
    for (int i = 0; i < 4; ++i) {
        const double ratio = void_probability(rs[i]).log_value / std::pow(rs[i], 4.0);
        REQUIRE(ratio == Approx(want[i]).epsilon(1e-9));
        if (i > 0) {
            const double prev = void_probability(rs[i - 1]).log_value / std::pow(rs[i - 1], 4.0);
            REQUIRE(ratio > prev);  // monotone approach toward -1/4 from below
        }
    }
}

TEST_CASE("solve_vn satisfies its defining equation") {
    for (double n : {10.0, 100.0, 1000.0, 1e4, 1e6}) {
        for (double tau : {0.5, 1.0, 2.0}) {
            const VnSolution s = solve_vn(n, tau);
            REQUIRE(s.n == n);
            REQUIRE(s.tau == tau);
            REQUIRE(std::abs(s.residual) <= 1e-10 * tau / (n * n));
            REQUIRE(palm_void_probability(s.v_n) ==
                    Approx(tau / (n * n)).epsilon(1e-9));
            REQUIRE(s.asymptotic_ratio ==
                    Approx(std::pow(s.v_n, 4.0) / (4.0 * std::log(n))).epsilon(1e-12));
        }
    }
}

TEST_CASE("solve_vn fixed values") {
    REQUIRE(solve_vn(100.0, 1.0).v_n == Approx(2.28710580191).epsilon(1e-9));
    REQUIRE(solve_vn(1000.0, 1.0).v_n == Approx(2.54782402948).epsilon(1e-9));
    REQUIRE(solve_vn(1e4, 1.0).v_n == Approx(2.75019821538).epsilon(1e-9));
    REQUIRE(solve_vn(1e6, 1.0).v_n == Approx(3.06220875574).epsilon(1e-9));
    REQUIRE(solve_vn(1000.0, 1.0).asymptotic_ratio == Approx(1.525038411).epsilon(1e-8));
}

TEST_CASE("v_n grows with n and shrinks with tau") {
    double prev = 0.0;
    for (double n : {10.0, 30.0, 100.0, 1000.0, 1e5}) {
        const double v = solve_vn(n, 1.0).v_n;
        REQUIRE(v > prev);
        prev = v;
    }
    REQUIRE(solve_vn(100.0, 2.0).v_n < solve_vn(100.0, 1.0).v_n);
    // identical across repeated solves
    const VnSolution a = solve_vn(1e4, 1.0), b = solve_vn(1e4, 1.0);
    REQUIRE(a.v_n == b.v_n);
    REQUIRE(a.residual == b.residual);
}

TEST_CASE("chernoff tail dominates the exact gamma tail") {
    REQUIRE(chernoff_gamma_tail(1, 4.0) == Approx(0.1991482735).epsilon(1e-9));
    for (long k : {1L, 2L, 5L, 20L, 80L}) {
        for (double r2 : {2.0, 9.0, 36.0, 100.0}) {
            const double bound = chernoff_gamma_tail(k, r2);
            REQUIRE(bound <= 1.0);
            if (k < (long)r2) {
                const double exact = regularized_upper_gamma((int)k, r2);
                REQUIRE(bound >= exact);
            } else {
                REQUIRE(bound == 1.0);
            }
        }
    }
}

TEST_CASE("few points bound values and regime guard") {
    REQUIRE(few_points_log_bound(6.0).log_bound == Approx(-239.74461).epsilon(1e-6));
    REQUIRE(few_points_log_bound(6.0).proxy == Approx(-324.0).epsilon(1e-12));
    const double vals[] = {2.6712182, -1.9928039, -28.866103, -99.099578};
    const double vs[] = {2.2, 3.0, 4.0, 5.0};
    for (int i = 0; i < 4; ++i)
        REQUIRE(few_points_log_bound(vs[i]).log_bound == Approx(vals[i]).epsilon(1e-6));
    REQUIRE_THROWS_AS(few_points_log_bound(1.9), invalid_regime);  // needs v^2 >= 4

    // the bound really dominates log P(N(B_v) <= 2) = log(p0 + p1 + p2);
    // compare against the analytic few-point probabilities via Kostlan factors
    for (double v : {2.5, 3.0}) {
        // P(<=2 points) >= P(0 points); the bound must sit above both
        const double log_p0 = void_probability(v).log_value;
        REQUIRE(few_points_log_bound(v).log_bound >= log_p0);
    }
}

TEST_CASE("theorem2_rate") {
    REQUIRE(theorem2_rate(1e6, 1.0 / 32.0, 1.0) == Approx(0.64938163).epsilon(1e-7));
    bool vac = false;
    theorem2_rate(100.0, 1.0 / 32.0, 1.0, &vac);
    REQUIRE_FALSE(vac);
    theorem2_rate(100.0, 0.0625, 1.0, &vac);
    REQUIRE(vac);  // epsilon = 1/16 wipes out the decay
    // decreasing in n for epsilon < 1/16
    REQUIRE(theorem2_rate(1e4, 0.01, 2.0) > theorem2_rate(1e6, 0.01, 2.0));
    REQUIRE(theorem2_rate(1e4, 0.01, 2.0) == Approx(2.0 * std::pow(1e4, 0.01 - 0.0625)));
}

TEST_CASE("bound report serialization carries the decomposition") {
    BoundReport r;
    r.dtv_term = 0.0;
    r.E1 = {0.0, 0.0};
    r.E2 = {1.5, 0.1};
    r.E3 = {2.0, 0.2};
    r.F = 4.0;
    r.c_constant = 1.0;
    r.total = r.dtv_term + 2.0 * (r.E1.value + r.E2.value + r.E3.value) + r.F;
    r.replicates = 10;
    r.seed = 3;
    const std::string js = bound_report_json(r);
    REQUIRE(js.find("\"total\"") != std::string::npos);
    REQUIRE(js.find("\"E2\"") != std::string::npos);
    const std::string row = bound_report_csv_row(r);
    const std::string hdr = bound_report_csv_header();
    REQUIRE(std::count(hdr.begin(), hdr.end(), ',') ==
            std::count(row.begin(), row.end(), ','));
}

TEST_CASE("kr witness separates distinct laws and accepts equal ones") {
    // Poisson(1/pi) on B_3 versus itself and versus double intensity
    const Region win = Disk{{0, 0}, 3.0};
    auto draw = [&](double lam, uint64_t seed, uint64_t base) {
        SampleBatch b;
        b.window = win;
        b.seed = seed;
        b.stream_base = base;
        for (int i = 0; i < 600; ++i) {
            RngStream rng(seed, base + i);
            b.patterns.push_back(sample_poisson(lam, win, rng));
        }
        return b;
    };
    const auto tests = default_witness_family(win);
    REQUIRE(!tests.empty());
    const SampleBatch A = draw(1.0 / M_PI, 51, 0);
    const SampleBatch A2 = draw(1.0 / M_PI, 52, 10000);
    const SampleBatch B = draw(2.0 / M_PI, 53, 20000);
    const KrEstimate same = kr_witness(A, A2, tests);
    const KrEstimate diff = kr_witness(A, B, tests);
    REQUIRE(same.lower_bound < 0.2);  // equal laws: gaps at SE scale, mostly floored
    REQUIRE(diff.lower_bound > 1.0);  // mean count differs by ~2.86
    REQUIRE(!diff.best_witness.empty());
}
