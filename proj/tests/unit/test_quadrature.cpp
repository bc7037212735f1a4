// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <forkdyn/quadrature.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace forkdyn;

TEST_CASE("polynomial and trig integrals", "[quadrature]")
{
    auto sq = [](double x) { return x * x; };
    REQUIRE(integrate_adaptive(sq, 0.0, 1.0, 1e-12) == Catch::Approx(1.0 / 3.0).margin(1e-11));

    auto s = [](double x) { return std::sin(x); };
    const double pi = 3.14159265358979323846;
    REQUIRE(integrate_adaptive(s, 0.0, pi, 1e-12) == Catch::Approx(2.0).margin(1e-10));

    // Oscillatory integrand with a known antiderivative.
    auto osc = [](double x) { return std::cos(7.0 * x); };
    REQUIRE(integrate_adaptive(osc, 0.0, 2.0, 1e-11) ==
            Catch::Approx(std::sin(14.0) / 7.0).margin(1e-9));
}

TEST_CASE("degenerate interval", "[quadrature]")
{
    auto f = [](double) { return 123.0; };
    REQUIRE(integrate_adaptive(f, 2.0, 2.0, 1e-9) == 0.0);
    REQUIRE(integrate_adaptive(f, 3.0, 1.0, 1e-9) == 0.0);
}

TEST_CASE("budget exhaustion reports the achieved error", "[quadrature]")
{
    auto rough = [](double x) { return std::sin(200.0 * x) / (0.01 + x * x); };
    try {
        integrate_adaptive(rough, 0.0, 10.0, 1e-13, 40);
        FAIL("expected QuadratureError");
    } catch (const QuadratureError& e) {
        REQUIRE(e.achieved_error > e.requested_error);
        REQUIRE(e.requested_error == 1e-13);
    }
}
