#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "toadlab/geometry.hpp"

using namespace toadlab;

TEST_CASE("christoffel symbols at reference traits") {
    const auto c1 = christoffel(1.0);
    CHECK(c1.gamma[0][0][1] == doctest::Approx(-0.5));
    CHECK(c1.gamma[0][1][0] == doctest::Approx(-0.5));
    CHECK(c1.gamma[1][0][0] == doctest::Approx(0.5));
    const auto c2 = christoffel(2.0);
    CHECK(c2.gamma[0][0][1] == doctest::Approx(-0.25));
    CHECK(c2.gamma[1][0][0] == doctest::Approx(0.125));
    // all remaining components vanish
    for (int c = 0; c < 2; ++c)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const bool named = (c == 0 && (a + b == 1)) || (c == 1 && a == 0 && b == 0);
                if (!named) CHECK(c1.gamma[c][a][b] == 0.0);
            }
    CHECK_THROWS_AS(christoffel(0.5, 1.0), std::domain_error);
}

TEST_CASE("christoffel symbols match the finite-difference oracle") {
    for (double th : {1.0, 1.7, 3.0, 10.0}) {
        const auto mine = christoffel(th);
        const auto fd = oracle::christoffel_fd(th);
        for (int c = 0; c < 2; ++c)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    CHECK(std::abs(mine.gamma[c][a][b] - fd[c][a][b]) < 1e-8);
    }
}

TEST_CASE("scalar curvature is -2/theta^2 and bounded below") {
    CHECK(scalar_curvature(1.0) == -2.0);
    CHECK(scalar_curvature(10.0) == doctest::Approx(-0.02));
    const double theta_min = 1.0;
    for (double th = theta_min; th < 50.0; th += 0.37)
        CHECK(scalar_curvature(th, theta_min) >= -2.0 / (theta_min * theta_min));
    CHECK_THROWS_AS(scalar_curvature(0.2, 1.0), std::domain_error);
}

TEST_CASE("metric is positive definite above the floor") {
    Metric g;
    g.theta_min = 1.0;
    for (double th : {1.0, 2.5, 40.0}) {
        const auto d = g.g(th);
        CHECK(d[0] > 0.0);
        CHECK(d[1] > 0.0);
        const auto di = g.g_inv(th);
        CHECK(d[0] * di[0] == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(g.g(0.5), std::domain_error);
}

TEST_CASE("geodesic distance: coincident points and the flat trait direction") {
    CHECK(geodesic_distance(2.0, 3.0, 2.0, 3.0, 1.0) == doctest::Approx(0.0).epsilon(1e-6));
    // g_22 = 1: a pure-theta segment has Euclidean length
    CHECK(geodesic_distance(0.0, 1.0, 0.0, 4.0, 1.0) == doctest::Approx(3.0).epsilon(1e-4));
}

TEST_CASE("horizontal runs are cheaper when the path bulges upward") {
    const double x = 8.0;
    const double d = geodesic_distance(0.0, 1.0, x, 1.0, 1.0);
    CHECK(d < x / std::sqrt(1.0)); // straight path at the floor
    CHECK(d > 0.0);
}

TEST_CASE("geodesic symmetry") {
    const double a = geodesic_distance(0.0, 1.0, 6.0, 2.5, 1.0);
    const double b = geodesic_distance(6.0, 2.5, 0.0, 1.0, 1.0);
    CHECK(a == doctest::Approx(b).epsilon(1e-4));
}

TEST_CASE("action-distance identity for m = 0") {
    const auto flat = TradeoffSpec::zero(1.0);
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> ux(-6.0, 6.0), uth(1.0, 5.0);
    for (int it = 0; it < 10; ++it) {
        const double x0 = ux(rng), x1 = ux(rng);
        const double th0 = uth(rng), th1 = uth(rng);
        const double t = 2.0;
        const double zeta =
            minimize_action_path(flat, t, x0, th0, x1, th1, 200, 3).best.action;
        const double d = geodesic_distance(x0, th0, x1, th1, 1.0, 160);
        if (d < 1e-6) continue;
        CHECK(zeta == doctest::Approx(d * d / (4.0 * t)).epsilon(0.01));
    }
}
