// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef FORKDYN_CHAIN_MODEL_H
#define FORKDYN_CHAIN_MODEL_H

#include <forkdyn/lattice_paths.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace forkdyn {

/** Mining / communication rates of the two-branch fork chain (per hour). */
struct ChainRates {
    double lambda1{0.0}; //!< pool mining rate
    double lambda2{0.0}; //!< community mining rate
    double mu{0.0};      //!< communication completion rate

    void validate() const
    {
        if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !(mu > 0.0))
            throw std::invalid_argument("ChainRates: rates must be positive");
        if (!(lambda1 < lambda2))
            throw std::invalid_argument("ChainRates: lambda1 < lambda2 required");
    }
};

/** Fork state: pool branch length k, community branch length l. */
struct ForkState {
    int k{0};
    int l{0};
    friend bool operator<(const ForkState& a, const ForkState& b)
    {
        return a.k != b.k ? a.k < b.k : a.l < b.l;
    }
    friend bool operator==(const ForkState& a, const ForkState& b)
    {
        return a.k == b.k && a.l == b.l;
    }
};

enum class Variant { honest, selfish };

/**
 * Sparse generator of the truncated fork CTMC. States satisfy k+l <= N;
 * mining transitions that would leave the truncation set are redirected
 * to (0,0), which keeps the chain irreducible and conservative.
 */
class Generator
{
public:
    Variant variant;
    int truncation;
    std::vector<ForkState> states;                              //!< k-major enumeration
    std::vector<std::vector<std::pair<int, double>>> out_rates; //!< per-row off-diagonal entries
    std::vector<double> diagonal;                               //!< minus total outflow per row

    int index(int k, int l) const
    {
        // Row-major over k with shrinking l range: offset(k) = sum_{j<k} (N+1-j).
        if (k < 0 || l < 0 || k + l > truncation) return -1;
        int off = k * (truncation + 1) - k * (k - 1) / 2;
        return off + l;
    }

    std::size_t size() const { return states.size(); }

    /** Rate from state a to state b; zero when no transition exists. */
    double rate(const ForkState& a, const ForkState& b) const
    {
        int ia = index(a.k, a.l);
        if (ia < 0) return 0.0;
        if (a == b) return diagonal[ia];
        int ib = index(b.k, b.l);
        if (ib < 0) return 0.0;
        for (const auto& [j, r] : out_rates[ia])
            if (j == ib) return r;
        return 0.0;
    }
};

/** Stationary distribution over the truncated state set. */
class StationaryDistribution
{
public:
    int truncation{0};
    std::vector<ForkState> states;
    std::vector<double> probabilities;

    double pi(int k, int l) const
    {
        if (k < 0 || l < 0 || k + l > truncation) return 0.0;
        int off = k * (truncation + 1) - k * (k - 1) / 2;
        return probabilities[off + l];
    }
};

namespace detail {

/** Whether the communication transition (k,l) -> (0,0) exists. */
inline bool has_reset(Variant variant, int k, int l)
{
    if (k == 0 && l == 0) return false;
    if (variant == Variant::honest) return k != l;
    // Selfish pool: concedes when behind, and reveals only the decisive
    // block of a lead it is cashing in (k >= 2, l = k-1). It withholds at
    // l <= k-2 and races (no reset) at l = k.
    return k < l || (k >= 2 && l == k - 1);
}

/** Generator construction without ChainRates validation (rate symmetry tests). */
inline Generator build_generator_unchecked(const ChainRates& rates, Variant variant,
                                           int truncation)
{
    if (truncation < 2) throw std::invalid_argument("truncation >= 2 required");
    Generator gen;
    gen.variant = variant;
    gen.truncation = truncation;
    for (int k = 0; k <= truncation; ++k)
        for (int l = 0; k + l <= truncation; ++l) gen.states.push_back({k, l});

    const int origin = gen.index(0, 0);
    gen.out_rates.resize(gen.states.size());
    gen.diagonal.assign(gen.states.size(), 0.0);
    for (std::size_t s = 0; s < gen.states.size(); ++s) {
        const auto [k, l] = gen.states[s];
        std::map<int, double> row;
        int up = gen.index(k + 1, l);
        int right = gen.index(k, l + 1);
        row[up >= 0 ? up : origin] += rates.lambda1;
        row[right >= 0 ? right : origin] += rates.lambda2;
        if (has_reset(variant, k, l)) row[origin] += rates.mu;
        double total = 0.0;
        for (const auto& [j, r] : row) {
            if (static_cast<std::size_t>(j) != s) {
                gen.out_rates[s].emplace_back(j, r);
                total += r;
            }
        }
        gen.diagonal[s] = -total;
    }
    return gen;
}

} // namespace detail

inline Generator build_generator(const ChainRates& rates, Variant variant, int truncation)
{
    rates.validate();
    return detail::build_generator_unchecked(rates, variant, truncation);
}

/**
 * Solves pi Q = 0, sum(pi) = 1 by dense LU on the transposed generator with
 * the normalization replacing the last equation. Verifies the residual; a
 * residual above 1e-10 indicates a reducible (mis-augmented) chain.
 */
inline StationaryDistribution solve_stationary(const Generator& gen)
{
    const int n = static_cast<int>(gen.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int s = 0; s < n; ++s) {
        A(s, s) = gen.diagonal[s];
        for (const auto& [j, r] : gen.out_rates[s]) A(j, s) += r;
    }
    A.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;

    Eigen::VectorXd pi = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(b);

    // Residual of the full stationary system: net flow per state.
    double residual = 0.0;
    std::vector<double> net(n, 0.0);
    for (int s = 0; s < n; ++s) {
        net[s] += gen.diagonal[s] * pi(s);
        for (const auto& [j, r] : gen.out_rates[s]) net[j] += r * pi(s);
    }
    for (int s = 0; s < n; ++s) residual = std::max(residual, std::abs(net[s]));
    if (!(residual <= 1e-10))
        throw std::runtime_error("solve_stationary: singular or reducible system (residual " +
                                 std::to_string(residual) + ")");

    double sum = 0.0;
    for (int s = 0; s < n; ++s) {
        if (pi(s) < 0.0) {
            if (pi(s) < -1e-12)
                throw std::runtime_error("solve_stationary: negative probability");
            pi(s) = 0.0;
        }
        sum += pi(s);
    }
    StationaryDistribution dist;
    dist.truncation = gen.truncation;
    dist.states = gen.states;
    dist.probabilities.resize(n);
    for (int s = 0; s < n; ++s) dist.probabilities[s] = pi(s) / sum;
    return dist;
}

/**
 * Unnormalized stationary weight of the honest chain (closed form):
 *   lambda1^k lambda2^l sum_i n(k,l;i) / [(lambda1+lambda2)^i
 *                                         (lambda1+lambda2+mu)^{k+l-i}],
 * with weight((0,0)) = 1 as the normalization reference. The caller
 * normalizes over a truncation set.
 */
inline double closed_form_pi(const ChainRates& rates, int k, int l)
{
    if (k < 0 || l < 0) throw std::invalid_argument("negative fork state");
    if (k == 0 && l == 0) return 1.0;
    const double lam = rates.lambda1 + rates.lambda2;
    const double lam_mu = lam + rates.mu;
    double sum = 0.0;
    for (int i = (k == l ? 1 : 0); i <= std::min(k, l); ++i) {
        double count = static_cast<double>(count_lattice_paths(k, l, i));
        sum += count / (std::pow(lam, i) * std::pow(lam_mu, k + l - i));
    }
    return std::pow(rates.lambda1, k) * std::pow(rates.lambda2, l) * sum;
}

/** Long-run orphan creation rate, pi(1,1) * (lambda1 + lambda2), per hour. */
inline double orphan_rate(const StationaryDistribution& pi, const ChainRates& rates)
{
    return pi.pi(1, 1) * (rates.lambda1 + rates.lambda2);
}

/** Double-spend parameters: confirmation depth z, honest share p. */
struct AttackParams {
    int z{0};
    double p{0.0};

    static AttackParams from_p(int z, double p)
    {
        if (z < 0) throw std::invalid_argument("z >= 0 required");
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("0 < p < 1 required");
        return {z, p};
    }

    static AttackParams from_rates(int z, double lambda1, double lambda2)
    {
        if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !(lambda1 < lambda2))
            throw std::invalid_argument("rates must satisfy 0 < lambda1 < lambda2");
        return from_p(z, lambda2 / (lambda1 + lambda2));
    }
};

/**
 * Probability that an attacker eventually overtakes a z-confirmation chain:
 *   P_A = 1 - sum_{k=0}^{z} C(z+k-1, z-1) (p^z q^k - p^k q^z),  q = 1-p.
 * With p <= 1/2 the attacker's random walk is recurrent and P_A = 1.
 */
inline double attacker_success_probability(const AttackParams& params)
{
    if (!(params.p > 0.0 && params.p < 1.0))
        throw std::invalid_argument("0 < p < 1 required");
    if (params.z == 0) return 1.0;
    if (params.p <= 0.5) return 1.0;
    const double p = params.p, q = 1.0 - params.p;
    const int z = params.z;
    double sum = 0.0;
    double binom = 1.0; // C(z+k-1, z-1), starting at k=0
    for (int k = 0; k <= z; ++k) {
        sum += binom * (std::pow(p, z) * std::pow(q, k) - std::pow(p, k) * std::pow(q, z));
        binom = binom * (z + k) / (k + 1);
    }
    double result = 1.0 - sum;
    if (result < 0.0) result = result > -1e-12 ? 0.0 : throw std::runtime_error("P_A < 0");
    if (result > 1.0) result = result < 1.0 + 1e-12 ? 1.0 : throw std::runtime_error("P_A > 1");
    return result;
}

/** Minimum pool share for selfish mining to pay off: (1-gamma)/(3-2 gamma). */
inline double selfish_threshold(double gamma)
{
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma in [0,1] required");
    return (1.0 - gamma) / (3.0 - 2.0 * gamma);
}

} // namespace forkdyn

#endif // FORKDYN_CHAIN_MODEL_H
