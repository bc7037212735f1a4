// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef FORKDYN_SPATIAL_GAMMA_H
#define FORKDYN_SPATIAL_GAMMA_H

#include <forkdyn/quadrature.hpp>
#include <forkdyn/rng.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace forkdyn {

/**
 * Planar relay model parameters: two reference miners at distance d12,
 * relay nodes as a planar Poisson process of intensity nu, transmission
 * times normal with mean k_slope * distance and standard deviation sigma.
 * All race probabilities depend on (k_slope, sigma) only through their
 * ratio; the defaults fix the ratio at 50.
 */
struct SpatialParams {
    double d12{1.0};
    double nu{0.4};
    double k_slope{50.0};
    double sigma{1.0};

    void validate() const
    {
        if (!(d12 > 0.0 && nu > 0.0 && k_slope > 0.0 && sigma > 0.0))
            throw std::invalid_argument("SpatialParams: all fields must be positive");
    }
};

/** Standard normal CDF. */
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730950488); }

/**
 * Area of the ellipse of points whose summed distance to two foci d12
 * apart is at most x: A(x) = (pi x / 4) sqrt(x^2 - d12^2).
 */
inline double ellipse_area(double x, double d12)
{
    if (x < d12) throw std::domain_error("ellipse_area requires x >= d12");
    return 0.25 * M_PI * x * std::sqrt(x * x - d12 * d12);
}

/** Inverse of ellipse_area in x, for w >= 0. */
inline double ellipse_area_inverse(double w, double d12)
{
    if (w < 0.0) throw std::invalid_argument("ellipse_area_inverse requires w >= 0");
    double t = 8.0 * w / M_PI;
    return std::sqrt(0.5 * (std::sqrt(t * t + std::pow(d12, 4)) + d12 * d12));
}

/** P(nearest relay round-trip distance <= x) = 1 - exp(-nu A(x)). */
inline double nearest_relay_cdf(double x, const SpatialParams& params)
{
    params.validate();
    if (x < params.d12) throw std::domain_error("nearest_relay_cdf requires x >= d12");
    return 1.0 - std::exp(-params.nu * ellipse_area(x, params.d12));
}

/**
 * Probability that the relay with the smallest round-trip distance beats
 * the direct transmission. Laplace form on w = A(x):
 *   gamma_tilde = nu Int_0^inf e^{-nu w} Phi(k (d12 - A^{-1}(w)) / (sqrt(3) sigma)) dw.
 * Absolute error <= 1e-6.
 */
inline double gamma_tilde(const SpatialParams& params)
{
    params.validate();
    const double ratio = params.k_slope / params.sigma;
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    // Beyond x = d12 + 14 sigma/k the Phi factor is below 2e-13 and the
    // integrand is negligible relative to the 1e-6 target.
    const double x_top = params.d12 + 14.0 / ratio;
    const double w_top = ellipse_area(x_top, params.d12);
    auto integrand = [&](double w) {
        double x = ellipse_area_inverse(w, params.d12);
        return params.nu * std::exp(-params.nu * w) *
               normal_cdf(ratio * (params.d12 - x) * inv_sqrt3);
    };
    return integrate_adaptive(integrand, 0.0, w_top, 1e-8);
}

/**
 * Intensity measure of relay round-trip times: expected number of relays
 * whose round-trip time is at most y,
 *   Lambda_T(y) = nu Int_{d12}^inf A'(x) Phi((y - k x)/(sqrt(2) sigma)) dx,
 * evaluated after the substitution w = A(x), which removes the endpoint
 * singularity of A'(x). The upper limit is truncated where Phi < 1e-12.
 */
inline double lambda_T(double y, const SpatialParams& params)
{
    params.validate();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const double x_top = (y + 12.5 * params.sigma) / params.k_slope;
    if (x_top <= params.d12) return 0.0;
    const double w_top = ellipse_area(x_top, params.d12);
    auto integrand = [&](double w) {
        double x = ellipse_area_inverse(w, params.d12);
        return params.nu * normal_cdf((y - params.k_slope * x) * inv_sqrt2 / params.sigma);
    };
    return integrate_adaptive(integrand, 0.0, w_top, 1e-9 * std::max(1.0, w_top));
}

/**
 * Probability that any relay beats the direct transmission:
 *   gamma = 1 - E[exp(-Lambda_T(T12))],  T12 ~ N(k d12, sigma^2),
 * with the outer integral truncated at k d12 +- 8 sigma. Absolute error
 * <= 1e-4 (dominated by the inner Lambda_T tolerance).
 */
inline double gamma_all_relays(const SpatialParams& params)
{
    params.validate();
    const double mean = params.k_slope * params.d12;
    const double lo = mean - 8.0 * params.sigma, hi = mean + 8.0 * params.sigma;
    const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * params.sigma);
    auto integrand = [&](double u) {
        double z = (u - mean) / params.sigma;
        return norm * std::exp(-0.5 * z * z - lambda_T(u, params));
    };
    return 1.0 - integrate_adaptive(integrand, lo, hi, 1e-6);
}

/**
 * Monte-Carlo oracle for gamma_tilde (mode nearest) and gamma_all_relays
 * (mode all). Relay configurations are sampled from the Poisson process
 * restricted to the ellipse of round-trip distance <= d12 + 30 sigma/k
 * inside the sampling window: relays beyond it lose the race with
 * probability < Phi(-17) and contribute nothing at double precision.
 * Negative delay samples are kept, matching the analytic model.
 */
enum class GammaMode { nearest, all };

struct MonteCarloEstimate {
    double estimate;
    double stderr_;
};

inline MonteCarloEstimate monte_carlo_gamma(const SpatialParams& params, GammaMode mode,
                                            long n_samples, double window_radius = 0.0,
                                            uint64_t seed = 1)
{
    params.validate();
    if (n_samples < 1000) throw std::invalid_argument("n_samples >= 1000 required");
    const double d = params.d12, sigma = params.sigma, k = params.k_slope;
    double window = std::max(window_radius, 4.0 * d);
    double x_cut = std::min(d + 30.0 * sigma / k, 2.0 * window);
    const double a = 0.5 * x_cut;                        // ellipse semi-major
    const double b = 0.5 * std::sqrt(x_cut * x_cut - d * d); // semi-minor
    const double mean_count = params.nu * ellipse_area(x_cut, d);

    RandomStream rng(seed);
    const double sqrt3 = std::sqrt(3.0), sqrt2 = std::sqrt(2.0);
    long wins = 0;
    for (long s = 0; s < n_samples; ++s) {
        uint32_t m = rng.poisson(mean_count);
        if (mode == GammaMode::nearest) {
            double best = std::numeric_limits<double>::infinity();
            for (uint32_t j = 0; j < m; ++j) {
                double ang = 2.0 * M_PI * rng.uniform01();
                double rad = std::sqrt(rng.uniform01());
                double px = a * rad * std::cos(ang), py = b * rad * std::sin(ang);
                double round_trip = std::hypot(px + 0.5 * d, py) + std::hypot(px - 0.5 * d, py);
                best = std::min(best, round_trip);
            }
            if (m == 0) continue;
            // Delta = T13 + T32 - T12 has mean k (D - d12) and variance 3 sigma^2.
            double delta = k * (best - d) + sqrt3 * sigma * rng.normal();
            if (delta < 0.0) ++wins;
        } else {
            double t12 = k * d + sigma * rng.normal();
            bool won = false;
            for (uint32_t j = 0; j < m; ++j) {
                double ang = 2.0 * M_PI * rng.uniform01();
                double rad = std::sqrt(rng.uniform01());
                double px = a * rad * std::cos(ang), py = b * rad * std::sin(ang);
                double round_trip = std::hypot(px + 0.5 * d, py) + std::hypot(px - 0.5 * d, py);
                double ti = k * round_trip + sqrt2 * sigma * rng.normal();
                if (ti <= t12) won = true;
            }
            if (won) ++wins;
        }
    }
    double p = static_cast<double>(wins) / static_cast<double>(n_samples);
    double se = std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
    return {p, se};
}

} // namespace forkdyn

#endif // FORKDYN_SPATIAL_GAMMA_H
