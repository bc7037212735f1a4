// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef FORKDYN_RNG_H
#define FORKDYN_RNG_H

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace forkdyn {

/** splitmix64 step; used for seeding and for deriving substreams. */
inline uint64_t splitmix64(uint64_t& x)
{
    uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * Deterministic random stream (xoshiro256++ core with explicit, portable
 * distribution transforms). The standard-library distributions are
 * implementation-defined, which would break the bit-identical trace
 * contract across toolchains, so the few transforms needed are spelled
 * out here.
 */
class RandomStream
{
public:
    explicit RandomStream(uint64_t seed, uint64_t substream = 0)
    {
        uint64_t sm = seed ^ (0xD1B54A32D192ED03ULL * (substream + 1));
        for (auto& word : m_s) word = splitmix64(sm);
        m_have_cached_normal = false;
    }

    uint64_t next_u64()
    {
        const uint64_t result = rotl(m_s[0] + m_s[3], 23) + m_s[0];
        const uint64_t t = m_s[1] << 17;
        m_s[2] ^= m_s[0];
        m_s[3] ^= m_s[1];
        m_s[1] ^= m_s[2];
        m_s[0] ^= m_s[3];
        m_s[2] ^= t;
        m_s[3] = rotl(m_s[3], 45);
        return result;
    }

    /** Uniform double in [0, 1), 53 random bits. */
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /** Uniform double in (0, 1]; safe as a log() argument. */
    double uniform01_open_low()
    {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /** Uniform integer in [0, n). */
    uint64_t uniform_below(uint64_t n)
    {
        // Multiply-shift bounded draw with rejection of the biased tail.
        while (true) {
            uint64_t x = next_u64();
            __uint128_t m = static_cast<__uint128_t>(x) * n;
            uint64_t lo = static_cast<uint64_t>(m);
            if (lo >= n || lo >= static_cast<uint64_t>(-n) % n)
                return static_cast<uint64_t>(m >> 64);
        }
    }

    double exponential(double rate) { return -std::log(uniform01_open_low()) / rate; }

    /** Standard normal via Box-Muller; second member of each pair is cached. */
    double normal()
    {
        if (m_have_cached_normal) {
            m_have_cached_normal = false;
            return m_cached_normal;
        }
        double u1 = uniform01_open_low();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        m_cached_normal = r * std::sin(a);
        m_have_cached_normal = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /** Poisson count by inversion of the exponential race (Knuth). */
    uint32_t poisson(double mean)
    {
        if (mean < 0.0 || mean > 700.0)
            throw std::invalid_argument("poisson mean out of supported range");
        double limit = std::exp(-mean);
        double prod = uniform01();
        uint32_t n = 0;
        while (prod > limit) {
            prod *= uniform01();
            ++n;
        }
        return n;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t m_s[4];
    double m_cached_normal{0.0};
    bool m_have_cached_normal{false};
};

/** Stable child seed for replication index `rep` of master seed `seed`. */
inline uint64_t derive_seed(uint64_t seed, uint64_t rep)
{
    uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (rep + 1);
    return splitmix64(x);
}

} // namespace forkdyn

#endif // FORKDYN_RNG_H
