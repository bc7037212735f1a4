// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef FORKDYN_LATTICE_PATHS_H
#define FORKDYN_LATTICE_PATHS_H

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace forkdyn {

//! Largest supported k+l for exact path counts. C(64,32) still fits in
//! 64 bits; anything larger raises overflow_error instead of degrading
//! to floating point.
inline constexpr int MAX_PATH_SUM = 64;

namespace detail {

inline uint64_t checked_add(uint64_t a, uint64_t b)
{
    uint64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("path count overflow");
    return r;
}

/** Binomial coefficient table for n <= MAX_PATH_SUM (all values fit uint64_t). */
inline const std::vector<std::vector<uint64_t>>& binomial_table()
{
    static const std::vector<std::vector<uint64_t>> table = [] {
        std::vector<std::vector<uint64_t>> t(MAX_PATH_SUM + 1);
        for (int n = 0; n <= MAX_PATH_SUM; ++n) {
            t[n].resize(n + 1);
            t[n][0] = t[n][n] = 1;
            for (int r = 1; r < n; ++r) t[n][r] = checked_add(t[n - 1][r - 1], t[n - 1][r]);
        }
        return t;
    }();
    return table;
}

} // namespace detail

inline uint64_t binomial(int n, int r)
{
    if (n < 0 || r < 0 || r > n) return 0;
    if (n > MAX_PATH_SUM) throw std::overflow_error("binomial beyond supported range");
    return detail::binomial_table()[n][r];
}

/**
 * n(k,l;i): number of north/east lattice paths from the origin to (k,l)
 * that pass through exactly i diagonal points (j,j) with j > 0.
 * Computed by the recursion
 *   n(k,l;i) = n(k-1,l;i') + n(k,l-1;i'),  i' = i-1 on the diagonal, else i,
 * with n(k,0;0) = n(0,l;0) = 1. Exact integer arithmetic.
 */
inline uint64_t count_lattice_paths(int k, int l, int i)
{
    if (k < 0 || l < 0 || i < 0) throw std::invalid_argument("negative argument");
    if (k + l > MAX_PATH_SUM) throw std::overflow_error("k+l beyond supported range");
    int m = std::min(k, l);
    if (i > m) return 0;
    if (k == 0 && l == 0) return i == 0 ? 1 : 0;

    // dp[x][y] holds n(x,y;j) for the current touch count j.
    std::vector<std::vector<uint64_t>> dp(k + 1, std::vector<uint64_t>(l + 1, 0)), prev;
    for (int x = 0; x <= k; ++x) dp[x][0] = 1;
    for (int y = 0; y <= l; ++y) dp[0][y] = 1;
    dp[0][0] = 1;
    for (int x = 1; x <= k; ++x)
        for (int y = 1; y <= l; ++y)
            dp[x][y] = (x == y) ? 0 : detail::checked_add(dp[x - 1][y], dp[x][y - 1]);

    for (int j = 1; j <= i; ++j) {
        prev = dp;
        for (auto& row : dp) std::fill(row.begin(), row.end(), 0);
        for (int x = 1; x <= k; ++x)
            for (int y = 1; y <= l; ++y) {
                const auto& src = (x == y) ? prev : dp;
                dp[x][y] = detail::checked_add(x > 0 ? src[x - 1][y] : 0,
                                               y > 0 ? src[x][y - 1] : 0);
            }
    }
    return dp[k][l];
}

/**
 * T(k,i) = i 2^i C(2k-i,k) / (2k-i): Grand Dyck paths to (2k,0) touching
 * the axis exactly i times; equals count_lattice_paths(k,k,i).
 */
inline uint64_t grand_dyck_count(int k, int i)
{
    if (i < 1 || i > k) throw std::domain_error("grand_dyck_count requires 1 <= i <= k");
    if (2 * k > MAX_PATH_SUM) throw std::overflow_error("k beyond supported range");
    __uint128_t num = static_cast<__uint128_t>(i) * binomial(2 * k - i, k);
    num <<= i;
    return static_cast<uint64_t>(num / static_cast<unsigned>(2 * k - i));
}

/**
 * Closed form for n(k,l;i) with k != l:
 *   (|k-l|+i) 2^i C(k+l-i, max(k,l)) / (k+l-i).
 * The lower binomial index uses max(k,l) so the symmetry n(k,l;i)=n(l,k;i)
 * holds without a k>l restriction; agreement with the recursion is covered
 * by tests.
 */
inline uint64_t welsh_count(int k, int l, int i)
{
    if (k == l) throw std::domain_error("welsh_count requires k != l; use grand_dyck_count");
    if (k < 0 || l < 0 || i < 0 || i > std::min(k, l))
        throw std::domain_error("welsh_count requires 0 <= i <= min(k,l)");
    if (k + l > MAX_PATH_SUM) throw std::overflow_error("k+l beyond supported range");
    int d = k > l ? k - l : l - k;
    __uint128_t num = static_cast<__uint128_t>(d + i) * binomial(k + l - i, std::max(k, l));
    num <<= i;
    return static_cast<uint64_t>(num / static_cast<unsigned>(k + l - i));
}

} // namespace forkdyn

#endif // FORKDYN_LATTICE_PATHS_H
