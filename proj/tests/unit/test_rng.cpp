// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <forkdyn/rng.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

using forkdyn::RandomStream;

TEST_CASE("identical seeds give identical streams", "[rng]")
{
    RandomStream a(42), b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds give different streams", "[rng]")
{
    RandomStream a(1), b(2);
    bool differs = false;
    for (int i = 0; i < 16 && !differs; ++i) differs = a.next_u64() != b.next_u64();
    REQUIRE(differs);
}

TEST_CASE("uniform01 stays in the half-open unit interval", "[rng]")
{
    RandomStream rng(7);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 200000; ++i) {
        double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    REQUIRE(lo < 0.01);
    REQUIRE(hi > 0.99);
}

TEST_CASE("uniform_below covers the range uniformly", "[rng]")
{
    RandomStream rng(9);
    int counts[10] = {0};
    for (int i = 0; i < 100000; ++i) ++counts[rng.uniform_below(10)];
    for (int c : counts) {
        REQUIRE(c > 9000);
        REQUIRE(c < 11000);
    }
}

TEST_CASE("normal moments are close at large samples", "[rng]")
{
    RandomStream rng(11);
    const int n = 400000;
    double sum = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal(3.0, 2.0);
        sum += x;
        ss += x * x;
    }
    double mean = sum / n;
    double var = ss / n - mean * mean;
    REQUIRE(std::abs(mean - 3.0) < 0.02);
    REQUIRE(std::abs(var - 4.0) < 0.06);
}

TEST_CASE("exponential has the requested rate", "[rng]")
{
    RandomStream rng(13);
    const int n = 300000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rng.exponential(0.25);
    REQUIRE(std::abs(sum / n - 4.0) < 0.05);
}

TEST_CASE("poisson matches its mean and rejects huge means", "[rng]")
{
    RandomStream rng(17);
    const int n = 200000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rng.poisson(6.5);
    REQUIRE(std::abs(sum / n - 6.5) < 0.05);
    REQUIRE_THROWS_AS(rng.poisson(1e4), std::invalid_argument);
}

TEST_CASE("derive_seed decorrelates replication streams", "[rng]")
{
    std::set<uint64_t> seen;
    for (uint64_t rep = 0; rep < 64; ++rep) seen.insert(forkdyn::derive_seed(123, rep));
    REQUIRE(seen.size() == 64);
    REQUIRE(forkdyn::derive_seed(123, 0) != forkdyn::derive_seed(124, 0));
}
