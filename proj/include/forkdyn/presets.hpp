// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef FORKDYN_PRESETS_H
#define FORKDYN_PRESETS_H

#include <forkdyn/chain_model.hpp>
#include <forkdyn/metrics.hpp>
#include <forkdyn/sim_engine.hpp>
#include <forkdyn/spatial_gamma.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace forkdyn {

//! Stable text form for doubles in result tables (round-trips float64).
inline std::string format_value(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }
};

namespace detail {

inline void write_joined(std::ofstream& out, const std::vector<std::string>& cells,
                         const char* sep)
{
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << sep;
        out << cells[i];
    }
    out << '\n';
}

} // namespace detail

/** Writes <name>.csv and a gnuplot-friendly <name>.dat; returns the paths. */
inline std::vector<std::string> write_result_table(const ResultTable& table,
                                                   const std::string& dir,
                                                   const std::string& name)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> written;

    const std::string csv_path = (fs::path(dir) / (name + ".csv")).string();
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open " + csv_path);
    detail::write_joined(csv, table.columns, ",");
    for (const auto& row : table.rows) detail::write_joined(csv, row, ",");
    csv.flush();
    if (!csv) throw std::runtime_error("write failed: " + csv_path);
    written.push_back(csv_path);

    const std::string dat_path = (fs::path(dir) / (name + ".dat")).string();
    std::ofstream dat(dat_path, std::ios::binary);
    if (!dat) throw std::runtime_error("cannot open " + dat_path);
    dat << "# ";
    detail::write_joined(dat, table.columns, " ");
    for (const auto& row : table.rows) {
        std::vector<std::string> cells = row;
        for (auto& c : cells)
            if (c.empty()) c = "nan";
        detail::write_joined(dat, cells, " ");
    }
    dat.flush();
    if (!dat) throw std::runtime_error("write failed: " + dat_path);
    written.push_back(dat_path);
    return written;
}

namespace presets {

inline constexpr int MARKOV_TRUNCATION = 6;
inline constexpr double MARKOV_LAMBDA1 = 0.6;
inline constexpr double MARKOV_LAMBDA2 = 5.4;
inline constexpr double MARKOV_MU = 285.0;

inline const double SPATIAL_D12[] = {1.0, 4.0, 8.0, 12.0};
inline const double SPATIAL_NU[] = {0.4, 0.8, 1.2, 1.6};

inline uint64_t preset_seed(const std::string& family)
{
    if (family == "table1") return 9101;
    if (family == "table2") return 9102;
    if (family == "table3") return 9103;
    if (family == "table4") return 9104;
    if (family == "fig5") return 9105;
    if (family == "fig6") return 9106;
    if (family == "fig7") return 9107;
    if (family == "fig8") return 9108;
    if (family == "fig9") return 9109;
    if (family == "fig10") return 9110;
    if (family == "fig11") return 9111;
    if (family == "fig12") return 9112;
    if (family == "fig13") return 9113;
    throw std::invalid_argument("unknown preset family: " + family);
}

/** Pins down everything a simulation sweep varies per preset. */
struct SweepScale {
    int n_nodes{1000};
    long n_blocks{10000};
    int n_reps{12};
};

inline SimConfig base_config(const SweepScale& scale)
{
    SimConfig cfg;
    cfg.n_nodes = scale.n_nodes;
    cfg.n_blocks = scale.n_blocks;
    cfg.area_side = 1000.0;
    cfg.block_rate = 6.0;
    cfg.mean_delay_target = 10.0;
    cfg.cv = 0.001;
    cfg.runaway_cap = 5;
    return cfg;
}

inline ResultTable markov_table(Variant variant)
{
    ChainRates rates{MARKOV_LAMBDA1, MARKOV_LAMBDA2, MARKOV_MU};
    auto gen = build_generator(rates, variant, MARKOV_TRUNCATION);
    auto pi = solve_stationary(gen);
    ResultTable t;
    t.columns = {"k", "l", "pi"};
    for (int k = 0; k <= 3; ++k)
        for (int l = 0; l <= 3; ++l)
            t.add_row({std::to_string(k), std::to_string(l), format_value(pi.pi(k, l))});
    // Sentinel row: overall fork (orphan) rate per hour.
    t.add_row({"-1", "-1", format_value(orphan_rate(pi, rates))});
    return t;
}

inline ResultTable spatial_table(bool all_relays)
{
    ResultTable t;
    t.columns = {"d12", "nu", all_relays ? "gamma" : "gamma_tilde"};
    for (double d12 : SPATIAL_D12)
        for (double nu : SPATIAL_NU) {
            SpatialParams params{d12, nu, 50.0, 1.0};
            const double v = all_relays ? gamma_all_relays(params) : gamma_tilde(params);
            t.add_row({format_value(d12), format_value(nu), format_value(v)});
        }
    return t;
}

inline std::string opt_cell(const std::optional<Stat>& s, bool half_width)
{
    if (!s) return "";
    return format_value(half_width ? s->half_width : s->mean);
}

inline void progress(std::ostream* log, const std::string& what)
{
    if (log) *log << "# " << what << '\n' << std::flush;
}

inline ResultTable fig5_6(bool dwell, const SweepScale& scale, uint64_t seed, int threads,
                          const std::vector<double>& delays, std::ostream* log)
{
    ResultTable t;
    t.columns = {"mean_delay_s", dwell ? "mean_dwell_s" : "splits_per_day", "ci95", "n_reps"};
    int cell = 0;
    for (double delay : delays) {
        SimConfig cfg = base_config(scale);
        cfg.pool_fraction = 0.0;
        cfg.mean_delay_target = delay;
        cfg.seed = derive_seed(seed, 1000 + cell++);
        progress(log, "delay=" + format_value(delay));
        auto agg = replicate(cfg, scale.n_reps, threads);
        const Stat& s = dwell ? agg.mean_dwell_s : agg.splits_per_day;
        t.add_row({format_value(delay), format_value(s.mean), format_value(s.half_width),
                   std::to_string(scale.n_reps)});
    }
    return t;
}

inline ResultTable fig7(const SweepScale& scale, uint64_t seed, int threads,
                        const std::vector<double>& cvs, const std::vector<double>& alphas,
                        std::ostream* log)
{
    ResultTable t;
    t.columns = {"cv", "alpha", "gamma_hat", "ci95", "n_reps"};
    int cell = 0;
    for (double cv : cvs)
        for (double alpha : alphas) {
            SimConfig cfg = base_config(scale);
            cfg.cv = cv;
            cfg.pool_fraction = alpha;
            cfg.seed = derive_seed(seed, 1000 + cell++);
            progress(log, "cv=" + format_value(cv) + " alpha=" + format_value(alpha));
            auto agg = replicate(cfg, scale.n_reps, threads);
            t.add_row({format_value(cv), format_value(alpha),
                       opt_cell(agg.gamma_hat, false), opt_cell(agg.gamma_hat, true),
                       std::to_string(scale.n_reps)});
        }
    return t;
}

inline ResultTable fig8(const SweepScale& scale, uint64_t seed, int threads,
                        const std::vector<double>& alphas, std::ostream* log)
{
    ResultTable t;
    t.columns = {"alpha", "big_gamma_hat", "ci95", "predicted", "n_reps"};
    int cell = 0;
    for (double alpha : alphas) {
        SimConfig cfg = base_config(scale);
        cfg.pool_fraction = alpha;
        cfg.seed = derive_seed(seed, 1000 + cell++);
        progress(log, "alpha=" + format_value(alpha));
        auto agg = replicate(cfg, scale.n_reps, threads);
        std::string predicted;
        if (agg.gamma_hat)
            predicted = format_value(alpha + (1.0 - alpha) * agg.gamma_hat->mean);
        t.add_row({format_value(alpha), opt_cell(agg.big_gamma_hat, false),
                   opt_cell(agg.big_gamma_hat, true), predicted,
                   std::to_string(scale.n_reps)});
    }
    return t;
}

inline ResultTable fig9(const SweepScale& scale, uint64_t seed, int threads,
                        const std::vector<int>& sizes, const std::vector<double>& alphas,
                        std::ostream* log)
{
    ResultTable t;
    t.columns = {"n_nodes", "alpha", "r_pool", "ci95", "n_reps"};
    int cell = 0;
    for (int n : sizes)
        for (double alpha : alphas) {
            SimConfig cfg = base_config(scale);
            cfg.n_nodes = n;
            cfg.pool_fraction = alpha;
            cfg.seed = derive_seed(seed, 1000 + cell++);
            progress(log, "n=" + std::to_string(n) + " alpha=" + format_value(alpha));
            auto agg = replicate(cfg, scale.n_reps, threads);
            t.add_row({std::to_string(n), format_value(alpha), format_value(agg.r_pool.mean),
                       format_value(agg.r_pool.half_width), std::to_string(scale.n_reps)});
        }
    return t;
}

inline ResultTable alpha_sweep(const std::string& kind, const SweepScale& scale, uint64_t seed,
                               int threads, const std::vector<double>& alphas, std::ostream* log)
{
    ResultTable t;
    if (kind == "splits")
        t.columns = {"alpha", "splits_per_day", "ci95", "n_reps"};
    else if (kind == "revenue")
        t.columns = {"alpha", "revenue_pool_btc_per_miner_hour", "pool_ci95",
                     "revenue_honest_btc_per_miner_hour", "honest_ci95", "n_reps"};
    else if (kind == "share")
        t.columns = {"alpha", "r_pool", "ci95", "n_reps"};
    else
        t.columns = {"alpha", "blocks_per_hour_pool", "pool_ci95", "blocks_per_hour_honest",
                     "honest_ci95", "blocks_per_hour_total", "total_ci95", "n_reps"};
    int cell = 0;
    for (double alpha : alphas) {
        SimConfig cfg = base_config(scale);
        cfg.pool_fraction = alpha;
        cfg.seed = derive_seed(seed, 1000 + cell++);
        progress(log, "alpha=" + format_value(alpha));
        auto agg = replicate(cfg, scale.n_reps, threads);
        const std::string reps = std::to_string(scale.n_reps);
        if (kind == "splits")
            t.add_row({format_value(alpha), format_value(agg.splits_per_day.mean),
                       format_value(agg.splits_per_day.half_width), reps});
        else if (kind == "revenue")
            t.add_row({format_value(alpha), opt_cell(agg.revenue_pool_per_miner_hour, false),
                       opt_cell(agg.revenue_pool_per_miner_hour, true),
                       format_value(agg.revenue_honest_per_miner_hour.mean),
                       format_value(agg.revenue_honest_per_miner_hour.half_width), reps});
        else if (kind == "share")
            t.add_row({format_value(alpha), format_value(agg.r_pool.mean),
                       format_value(agg.r_pool.half_width), reps});
        else
            t.add_row({format_value(alpha), format_value(agg.blocks_per_hour_pool.mean),
                       format_value(agg.blocks_per_hour_pool.half_width),
                       format_value(agg.blocks_per_hour_honest.mean),
                       format_value(agg.blocks_per_hour_honest.half_width),
                       format_value(agg.blocks_per_hour_total.mean),
                       format_value(agg.blocks_per_hour_total.half_width), reps});
    }
    return t;
}

} // namespace presets

inline std::vector<std::string> list_presets()
{
    std::vector<std::string> names;
    for (const char* base : {"table1", "table2", "table3", "table4", "fig5", "fig6", "fig7",
                             "fig8", "fig9", "fig10", "fig11", "fig12", "fig13"}) {
        names.emplace_back(base);
        names.emplace_back(std::string(base) + "-small");
    }
    return names;
}

/**
 * Computes one named preset and writes <name>.csv / <name>.dat under
 * `dir`. The -small variants shrink the simulated system (200 nodes,
 * 2000 blocks, 4 replications) and thin the parameter grids; table
 * presets are already fast, so their -small variants are identical.
 * `seed_override` (nonzero) replaces the preset's documented seed.
 * Progress lines go to `log` (may be null). Returns the written paths.
 */
inline std::vector<std::string> run_preset(const std::string& name, const std::string& dir,
                                           int threads = 0, std::ostream* log = nullptr,
                                           uint64_t seed_override = 0)
{
    using namespace presets;
    const bool small = name.size() > 6 && name.substr(name.size() - 6) == "-small";
    const std::string family = small ? name.substr(0, name.size() - 6) : name;
    const uint64_t preset_default = preset_seed(family); // also validates the name
    const uint64_t seed = seed_override != 0 ? seed_override : preset_default;

    SweepScale scale;
    if (small) {
        scale.n_nodes = 200;
        scale.n_blocks = 2000;
        scale.n_reps = 4;
    }

    const std::vector<double> delays =
        small ? std::vector<double>{3.16, 31.6}
              : std::vector<double>{1.0, 3.16, 10.0, 31.6, 100.0};
    const std::vector<double> alphas_fine =
        small ? std::vector<double>{0.1, 0.3, 0.5}
              : std::vector<double>{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
    const std::vector<double> alphas_zero =
        small ? std::vector<double>{0.0, 0.2, 0.4}
              : std::vector<double>{0.0,  0.05, 0.1,  0.15, 0.2, 0.25,
                                    0.3,  0.35, 0.4,  0.45, 0.5};
    const std::vector<double> alphas_span =
        small ? std::vector<double>{0.0, 0.2, 0.35, 0.45} : alphas_zero;
    const std::vector<double> cvs =
        small ? std::vector<double>{0.001} : std::vector<double>{0.001, 0.01, 0.1};
    const std::vector<int> sizes =
        small ? std::vector<int>{100, 200} : std::vector<int>{100, 400, 700, 1000};
    const std::vector<double> alphas_grid =
        small ? std::vector<double>{0.2, 0.4}
              : std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5};

    ResultTable table;
    if (family == "table1")
        table = markov_table(Variant::honest);
    else if (family == "table2")
        table = markov_table(Variant::selfish);
    else if (family == "table3")
        table = spatial_table(false);
    else if (family == "table4")
        table = spatial_table(true);
    else if (family == "fig5")
        table = fig5_6(false, scale, seed, threads, delays, log);
    else if (family == "fig6")
        table = fig5_6(true, scale, seed, threads, delays, log);
    else if (family == "fig7")
        table = fig7(scale, seed, threads, cvs, alphas_fine, log);
    else if (family == "fig8")
        table = fig8(scale, seed, threads, alphas_fine, log);
    else if (family == "fig9")
        table = fig9(scale, seed, threads, sizes, alphas_grid, log);
    else if (family == "fig10")
        table = alpha_sweep("splits", scale, seed, threads, alphas_zero, log);
    else if (family == "fig11")
        table = alpha_sweep("revenue", scale, seed, threads, alphas_zero, log);
    else if (family == "fig12")
        table = alpha_sweep("share", scale, seed, threads, alphas_span, log);
    else
        table = alpha_sweep("rates", scale, seed, threads, alphas_span, log);

    return write_result_table(table, dir, name);
}

} // namespace forkdyn

#endif // FORKDYN_PRESETS_H
