// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef FORKDYN_METRICS_H
#define FORKDYN_METRICS_H

#include <forkdyn/rng.hpp>
#include <forkdyn/sim_engine.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace forkdyn {

inline constexpr double BLOCK_REWARD_BTC = 25.0;

namespace detail {

inline double beta_cont_frac(double a, double b, double x)
{
    constexpr int MAXIT = 300;
    constexpr double EPS = 3e-14, FPMIN = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < FPMIN) d = FPMIN;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= MAXIT; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < FPMIN) d = FPMIN;
        c = 1.0 + aa / c;
        if (std::fabs(c) < FPMIN) c = FPMIN;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < FPMIN) d = FPMIN;
        c = 1.0 + aa / c;
        if (std::fabs(c) < FPMIN) c = FPMIN;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < EPS) break;
    }
    return h;
}

} // namespace detail

//! Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x)
{
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                               a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::beta_cont_frac(a, b, x) / a;
    return 1.0 - bt * detail::beta_cont_frac(b, a, 1.0 - x) / b;
}

inline double student_t_cdf(double t, double df)
{
    if (t == 0.0) return 0.5;
    const double x = df / (df + t * t);
    const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

//! Quantile of Student's t distribution, by bisection on the CDF.
inline double student_t_quantile(double p, double df)
{
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("t quantile needs p in (0,1)");
    if (!(df > 0.0)) throw std::invalid_argument("t quantile needs df > 0");
    if (p < 0.5) return -student_t_quantile(1.0 - p, df);
    if (p == 0.5) return 0.0;
    double lo = 0.0, hi = 1e6;
    for (int i = 0; i < 220; ++i) {
        const double mid = 0.5 * (lo + hi);
        (student_t_cdf(mid, df) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/** Sample mean with a 95% Student-t confidence-interval half width. */
struct Stat {
    double mean{0.0};
    double half_width{0.0};
    int n{0};
};

inline Stat mean_ci(const std::vector<double>& xs)
{
    Stat s;
    s.n = static_cast<int>(xs.size());
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / s.n;
    if (s.n < 2) return s;
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    const double sd = std::sqrt(ss / (s.n - 1));
    s.half_width = student_t_quantile(0.975, s.n - 1) * sd / std::sqrt(double(s.n));
    return s;
}

/** Power-law fit y = a * x^b by least squares in log-log space. */
struct FitResult {
    double a{0.0};
    double b{0.0};
    double r2{1.0};
};

inline FitResult loglog_fit(const std::vector<double>& xs, const std::vector<double>& ys)
{
    if (xs.size() != ys.size()) throw std::invalid_argument("loglog_fit: size mismatch");
    if (xs.size() < 3) throw std::invalid_argument("loglog_fit: need at least 3 points");
    const std::size_t n = xs.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw std::invalid_argument("loglog_fit: points must be positive");
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("loglog_fit: degenerate abscissae");
    FitResult fit;
    fit.b = sxy / sxx;
    fit.a = std::exp(my - fit.b * mx);
    if (syy > 0.0) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ly[i] - (std::log(fit.a) + fit.b * lx[i]);
            ssr += r * r;
        }
        fit.r2 = 1.0 - ssr / syy;
    }
    return fit;
}

/**
 * Per-run metrics. Rates are normalized by the nominal duration
 * n_blocks / block_rate, so the total production rate never exceeds the
 * configured mining rate. Optional fields are absent when the underlying
 * population is empty (no race episodes, no resolved races, no pool).
 */
struct MetricsReport {
    double splits_per_day{0.0};
    double mean_dwell_s{0.0};
    long n_races{0};
    std::optional<double> gamma_hat;
    std::optional<double> big_gamma_hat;
    double r_pool{0.0};
    double blocks_per_hour_pool{0.0};
    double blocks_per_hour_honest{0.0};
    double blocks_per_hour_total{0.0};
    std::optional<double> revenue_pool_per_miner_hour;
    double revenue_honest_per_miner_hour{0.0};
    long main_length{0};
};

inline MetricsReport summarize(const RawTrace& trace)
{
    MetricsReport rep;
    const double hours = trace.nominal_hours;
    const double days = hours / 24.0;
    const int n_nodes = static_cast<int>(trace.splits_per_node.size());
    const int n_pool = trace.n_pool_nodes;
    const int n_honest = n_nodes - n_pool;

    double splits = 0.0;
    for (int64_t s : trace.splits_per_node) splits += static_cast<double>(s);
    rep.splits_per_day = n_nodes > 0 && days > 0.0 ? splits / n_nodes / days : 0.0;

    if (!trace.desync.empty()) {
        double dwell = 0.0;
        for (const auto& iv : trace.desync) dwell += iv.regained - iv.lost;
        rep.mean_dwell_s = dwell / static_cast<double>(trace.desync.size());
    }

    rep.n_races = static_cast<long>(trace.races.size());
    if (!trace.races.empty()) {
        double acc = 0.0;
        long resolved = 0, won = 0;
        for (const auto& race : trace.races) {
            acc += race.honest_total > 0
                       ? static_cast<double>(race.honest_bp) / race.honest_total
                       : 0.0;
            if (race.resolved != 0) {
                ++resolved;
                if (race.resolved == 1) ++won;
            }
        }
        rep.gamma_hat = acc / static_cast<double>(trace.races.size());
        if (resolved > 0) rep.big_gamma_hat = static_cast<double>(won) / resolved;
    }

    long np = 0, total = 0;
    for (int32_t b : trace.final_main) {
        if (b == GENESIS_ID) continue;
        ++total;
        if (trace.blocks[b].pool_origin) ++np;
    }
    const long nh = total - np;
    rep.main_length = total;
    rep.r_pool = total > 0 ? static_cast<double>(np) / total : 0.0;
    if (hours > 0.0) {
        rep.blocks_per_hour_pool = np / hours;
        rep.blocks_per_hour_honest = nh / hours;
        rep.blocks_per_hour_total = total / hours;
        if (n_pool > 0)
            rep.revenue_pool_per_miner_hour = BLOCK_REWARD_BTC * np / hours / n_pool;
        if (n_honest > 0)
            rep.revenue_honest_per_miner_hour = BLOCK_REWARD_BTC * nh / hours / n_honest;
    }
    return rep;
}

/** Aggregate of independent replications (seed varied per replication). */
struct ReplicatedMetrics {
    int n_reps{0};
    Stat splits_per_day;
    Stat mean_dwell_s;
    Stat n_races;
    Stat r_pool;
    Stat blocks_per_hour_pool;
    Stat blocks_per_hour_honest;
    Stat blocks_per_hour_total;
    Stat revenue_honest_per_miner_hour;
    std::optional<Stat> gamma_hat;
    std::optional<Stat> big_gamma_hat;
    std::optional<Stat> revenue_pool_per_miner_hour;
    std::vector<MetricsReport> per_rep;
};

inline int resolve_thread_count(int requested, int n_reps)
{
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("FORKDYN_THREADS")) n = std::atoi(env);
        if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
        if (n <= 0) n = 1;
    }
    if (n > n_reps) n = n_reps;
    return n < 1 ? 1 : n;
}

/**
 * Runs `n_reps` independent replications of `config`, replication i using
 * derive_seed(config.seed, i), and aggregates the per-run metrics.
 * Worker threads are capped by `threads` (<=0: FORKDYN_THREADS, then
 * hardware concurrency). Results are deterministic regardless of the
 * thread count because every replication is self-contained.
 */
inline ReplicatedMetrics replicate(const SimConfig& config, int n_reps, int threads = 0)
{
    if (n_reps < 2) throw std::invalid_argument("replicate: n_reps >= 2 required");
    config.validate();
    const int n_workers = resolve_thread_count(threads, n_reps);

    std::vector<MetricsReport> reports(n_reps);
    std::vector<std::exception_ptr> errors(n_reps);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_reps) return;
            try {
                SimConfig cfg = config;
                cfg.seed = derive_seed(config.seed, static_cast<uint64_t>(i));
                reports[i] = summarize(run_simulation(cfg));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);

    ReplicatedMetrics agg;
    agg.n_reps = n_reps;
    auto collect = [&](auto field) {
        std::vector<double> xs;
        xs.reserve(n_reps);
        for (const auto& r : reports) xs.push_back(field(r));
        return mean_ci(xs);
    };
    agg.splits_per_day = collect([](const MetricsReport& r) { return r.splits_per_day; });
    agg.mean_dwell_s = collect([](const MetricsReport& r) { return r.mean_dwell_s; });
    agg.n_races = collect([](const MetricsReport& r) { return double(r.n_races); });
    agg.r_pool = collect([](const MetricsReport& r) { return r.r_pool; });
    agg.blocks_per_hour_pool =
        collect([](const MetricsReport& r) { return r.blocks_per_hour_pool; });
    agg.blocks_per_hour_honest =
        collect([](const MetricsReport& r) { return r.blocks_per_hour_honest; });
    agg.blocks_per_hour_total =
        collect([](const MetricsReport& r) { return r.blocks_per_hour_total; });
    agg.revenue_honest_per_miner_hour =
        collect([](const MetricsReport& r) { return r.revenue_honest_per_miner_hour; });
    auto collect_opt = [&](auto field) -> std::optional<Stat> {
        std::vector<double> xs;
        for (const auto& r : reports)
            if (auto v = field(r)) xs.push_back(*v);
        if (xs.empty()) return std::nullopt;
        return mean_ci(xs);
    };
    agg.gamma_hat = collect_opt([](const MetricsReport& r) { return r.gamma_hat; });
    agg.big_gamma_hat = collect_opt([](const MetricsReport& r) { return r.big_gamma_hat; });
    agg.revenue_pool_per_miner_hour =
        collect_opt([](const MetricsReport& r) { return r.revenue_pool_per_miner_hour; });
    agg.per_rep = std::move(reports);
    return agg;
}

} // namespace forkdyn

#endif // FORKDYN_METRICS_H
