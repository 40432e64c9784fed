#include <catch2/catch.hpp>

#include <cmath>
#include <complex>

#include "dpplab/kernels.hpp"
#include "dpplab/rng.hpp"

using namespace dpplab;

namespace {
Point rand_point(RngStream& rng, double span) {
    return {rng.uniform(-span, span), rng.uniform(-span, span)};
}
}  // namespace

TEST_CASE("ginibre kernel identities") {
    const KernelSpec K = ginibre_kernel();
    REQUIRE(K.rho == Approx(1.0 / M_PI).epsilon(1e-15));
    REQUIRE(K.sup_norm == Approx(1.0 / M_PI).epsilon(1e-15));
    REQUIRE(K.stationary);

    RngStream rng(11, 0);
    for (int i = 0; i < 10000; ++i) {
        const Point x = rand_point(rng, 6.0), y = rand_point(rng, 6.0);
        const auto kxy = K.evaluate(x, y);
        const auto kyx = K.evaluate(y, x);
        // Hermitian symmetry, exact modulus, diagonal = intensity
        REQUIRE(std::abs(kxy - std::conj(kyx)) < 1e-12);
        const double want = std::exp(-0.5 * dist2(x, y)) / M_PI;
        REQUIRE(std::abs(std::abs(kxy) - want) < 1e-12);
        // envelope and kernel agree exactly in reals; allow rounding from the
        // two exponent routes (|z|^2 + |w|^2 vs |z-w|^2 cancellation)
        REQUIRE(std::abs(kxy) <= K.phi(dist(x, y)) * (1.0 + 1e-12));
    }
    const auto diag = K.evaluate({2.0, -1.0}, {2.0, -1.0});
    REQUIRE(diag.real() == Approx(1.0 / M_PI).epsilon(1e-14));
    REQUIRE(diag.imag() == 0.0);
    REQUIRE(K.phi(3.0) >= K.phi(3.5));
}

TEST_CASE("two-point correlation is isotropic and matches the closed form") {
    const KernelSpec K = ginibre_kernel();
    RngStream rng(12, 0);
    for (int i = 0; i < 200; ++i) {
        const Point x = rand_point(rng, 4.0);
        const double theta = rng.uniform(0.0, 2.0 * M_PI);
        const double r = rng.uniform(0.0, 5.0);
        const Point y{x.x + r * std::cos(theta), x.y + r * std::sin(theta)};
        const double rho2 = correlation_function(K, {x, y});
        const double want = (1.0 - std::exp(-r * r)) / (M_PI * M_PI);
        REQUIRE(rho2 == Approx(want).margin(1e-10));
    }
    // exact duplicates violate the precondition; near-coincidence vanishes
    REQUIRE_THROWS_AS(correlation_function(K, {{1.0, 1.0}, {1.0, 1.0}}),
                      std::invalid_argument);
    REQUIRE(correlation_function(K, {{1.0, 1.0}, {1.0 + 1e-7, 1.0}}) ==
            Approx(0.0).margin(1e-13));
    REQUIRE(correlation_function(K, {{0.3, 0.0}}) == Approx(1.0 / M_PI).epsilon(1e-13));
}

TEST_CASE("correlation_function clips fp noise, never negative") {
    const KernelSpec K = ginibre_kernel();
    RngStream rng(13, 0);
    for (int i = 0; i < 50; ++i) {
        std::vector<Point> pts;
        for (int j = 0; j < 4; ++j) pts.push_back(rand_point(rng, 2.0));
        // a nearly duplicated point drives the determinant to fp-noise scale
        pts.push_back({pts[0].x + 1e-9, pts[0].y});
        REQUIRE(correlation_function(K, pts) >= 0.0);
    }
}

TEST_CASE("palm kernel is the Schur complement") {
    const KernelSpec K = ginibre_kernel();
    const Point x{0.5, -0.3};
    const KernelSpec Kx = palm_kernel(K, x);
    REQUIRE(Kx.palm_depth == 1);
    RngStream rng(14, 0);
    for (int i = 0; i < 500; ++i) {
        const Point a = rand_point(rng, 3.0), b = rand_point(rng, 3.0);
        const auto want = K.evaluate(a, b) - K.evaluate(a, x) * K.evaluate(x, b) /
                                                  K.evaluate(x, x);
        REQUIRE(std::abs(Kx.evaluate(a, b) - want) < 1e-12);
    }
    // rho^(2)(x, y) = rho * rho_palm(y)
    for (int i = 0; i < 200; ++i) {
        const Point y = rand_point(rng, 3.0);
        const double lhs = correlation_function(K, {x, y});
        const double rhs = K.rho * Kx.evaluate(y, y).real();
        REQUIRE(lhs == Approx(rhs).margin(1e-12));
    }
}

TEST_CASE("palm intensity has the analytic radial profile") {
    // K^o(y,y) = (1 - e^{-|y|^2}) / pi for conditioning at the origin
    const KernelSpec Ko = palm_kernel(ginibre_kernel(), {0.0, 0.0});
    for (double r : {0.1, 0.5, 1.0, 2.0, 3.5}) {
        const double want = (1.0 - std::exp(-r * r)) / M_PI;
        REQUIRE(Ko.evaluate({r, 0.0}, {r, 0.0}).real() == Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("two-point palm kernel vanishes at its conditioning points") {
    const KernelSpec K = ginibre_kernel();
    const Point x{0.0, 0.0}, y{1.2, 0.4};
    const KernelSpec Kxy = two_point_palm_kernel(K, x, y);
    REQUIRE(Kxy.palm_depth == 2);
    REQUIRE(std::abs(Kxy.evaluate(x, x)) < 1e-10);
    REQUIRE(std::abs(Kxy.evaluate(y, y)) < 1e-10);
    // consistency with iterated one-point conditioning
    const KernelSpec iter = palm_kernel(palm_kernel(K, x), y);
    RngStream rng(15, 0);
    for (int i = 0; i < 200; ++i) {
        const Point a = rand_point(rng, 3.0), b = rand_point(rng, 3.0);
        REQUIRE(std::abs(Kxy.evaluate(a, b) - iter.evaluate(a, b)) < 1e-10);
    }
}

TEST_CASE("degenerate conditioning is rejected") {
    const KernelSpec K = ginibre_kernel();
    const Point x{1.0, 1.0};
    const KernelSpec Kx = palm_kernel(K, x);
    // conditioning the Palm kernel at its own atom
    REQUIRE_THROWS_AS(palm_kernel(Kx, x), degenerate_conditioning);
    bool depth_capped = false;
    try {
        KernelSpec deep = K;
        for (int d = 0; d < KernelSpec::palm_depth_cap + 1; ++d)
            deep = palm_kernel(deep, {double(d) * 2.0, 0.0});
    } catch (const std::exception&) {
        depth_capped = true;
    }
    REQUIRE(depth_capped);
}

TEST_CASE("correlation decay gap stays under its bound") {
    const KernelSpec K = ginibre_kernel();
    RngStream rng(16, 0);
    for (int rep = 0; rep < 40; ++rep) {
        std::vector<Point> A, B;
        const int na = 1 + (int)(rng.uniform() * 2), nb = 1 + (int)(rng.uniform() * 2);
        for (int i = 0; i < na; ++i) A.push_back(rand_point(rng, 1.0));
        const double cx = 4.0 + 2.0 * rng.uniform();
        for (int i = 0; i < nb; ++i)
            B.push_back({cx + 0.4 * rng.uniform(), 0.4 * rng.uniform()});
        const DecayGap g = correlation_decay_gap(K, A, B);
        REQUIRE(g.gap >= 0.0);
        REQUIRE(g.bound >= 0.0);
        REQUIRE(g.gap <= g.bound);
    }
    // the bound itself decays in the separation
    const DecayGap near = correlation_decay_gap(K, {{0, 0}}, {{3.0, 0}});
    const DecayGap far = correlation_decay_gap(K, {{0, 0}}, {{5.0, 0}});
    REQUIRE(far.bound < near.bound);
}
