// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <forkdyn/chain_model.hpp>
#include <forkdyn/metrics.hpp>
#include <forkdyn/presets.hpp>
#include <forkdyn/sim_engine.hpp>
#include <forkdyn/spatial_gamma.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

constexpr const char* TOP_USAGE = R"(usage: forkdyn <command> [options]

commands:
  markov      stationary fork distribution of the two-group chain model
  gamma       first-relay advantage in the planar relay model
  simulate    event-driven network simulation of N mining nodes
  reproduce   recompute a named result set (CSV + dat files)

Run 'forkdyn <command> --help' for command options.
)";

constexpr const char* MARKOV_USAGE = R"(usage: forkdyn markov [options]

Solves the truncated two-group fork process and prints the stationary
probabilities pi(k,l) as CSV (columns k,l,pi). The final row with
k=l=-1 carries the fork rate per hour.

options:
  --variant V      honest | selfish        (default honest)
  --lambda1 X      group-1 mining rate /h  (default 0.6)
  --lambda2 X      group-2 mining rate /h  (default 5.4)
  --mu X           sync rate /h            (default 285)
  --truncation N   state cap k+l <= N      (default 20)
  --kmax K         print rows k,l <= K     (default 3)
  --closed-form    evaluate the lattice-path closed form instead of
                   solving the linear system (honest variant only)
  --out FILE       write CSV here instead of stdout
)";

constexpr const char* GAMMA_USAGE = R"(usage: forkdyn gamma [options]

Computes the probability that a relay node hears the remote competing
block first, in the planar Poisson relay field.

options:
  --d12 X          distance between the two competing miners (required)
  --nu X           relay density                              (required)
  --k X            delay slope                                (default 50)
  --sigma X        delay noise sd                             (default 1)
  --mode M         tilde | all | mc-nearest | mc-all          (default tilde)
  --samples N      Monte Carlo sample count                   (default 100000)
  --window X       Monte Carlo window radius, 0 = automatic   (default 0)
  --seed S         Monte Carlo seed                           (default 1)
)";

constexpr const char* SIMULATE_USAGE = R"(usage: forkdyn simulate [options]

Runs the event-driven mining/propagation simulation and prints metrics
as CSV (columns metric,value,ci95).

options:
  --nodes N        node count                         (default 1000)
  --alpha X        selfish pool fraction, 0..0.5      (default 0)
  --area X         square side length                 (default 1000)
  --rate X         blocks per hour                    (default 6)
  --blocks N       mining events per replication      (default 10000)
  --delay X        mean pairwise delay, seconds       (default 10)
  --cv X           delay coefficient of variation     (default 0)
  --cap N          pool runaway publication cap       (default 5)
  --seed S         base seed                          (default 1)
  --reps R         replications                       (default 1)
  --threads T      worker threads, 0 = auto           (default 0)
  --event-log FILE stream the event log here (reps=1 only)
  --out FILE       write metrics CSV here instead of stdout
  --out-dir DIR    with reps >= 2: write summary.csv/.dat and
                   replications.csv/.dat into DIR
)";

constexpr const char* REPRODUCE_USAGE = R"(usage: forkdyn reproduce <preset> [options]

Recomputes a published result set. Use --list for preset names; every
preset also has a '-small' variant that shrinks the simulated system
(200 nodes, 2000 blocks, 4 replications) and thins parameter grids.

options:
  --out-dir DIR    output directory             (default results)
  --threads T      worker threads               (default 0 = auto)
  --seed S         override the preset's seed   (default: documented seed)
  --quiet          suppress progress lines on stderr
  --list           print preset names and exit
)";

class Args
{
public:
    Args(int argc, char** argv, int start)
    {
        for (int i = start; i < argc; ++i) {
            std::string a = argv[i];
            if (a.rfind("--", 0) == 0) {
                std::string key = a.substr(2), value;
                auto eq = key.find('=');
                bool have_value = false;
                if (eq != std::string::npos) {
                    value = key.substr(eq + 1);
                    key = key.substr(0, eq);
                    have_value = true;
                } else if (i + 1 < argc && std::string(argv[i + 1]).rfind("--", 0) != 0) {
                    value = argv[++i];
                    have_value = true;
                }
                m_flags[key] = have_value ? std::optional<std::string>(value) : std::nullopt;
            } else {
                m_positional.push_back(a);
            }
        }
    }

    bool has(const std::string& key) const { return m_flags.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& dflt) const
    {
        auto it = m_flags.find(key);
        if (it == m_flags.end()) return dflt;
        if (!it->second) throw std::invalid_argument("--" + key + " needs a value");
        return *it->second;
    }

    double get_double(const std::string& key, double dflt) const
    {
        auto it = m_flags.find(key);
        if (it == m_flags.end()) return dflt;
        if (!it->second) throw std::invalid_argument("--" + key + " needs a value");
        std::size_t pos = 0;
        double v = std::stod(*it->second, &pos);
        if (pos != it->second->size())
            throw std::invalid_argument("--" + key + ": bad number '" + *it->second + "'");
        return v;
    }

    long get_long(const std::string& key, long dflt) const
    {
        auto it = m_flags.find(key);
        if (it == m_flags.end()) return dflt;
        if (!it->second) throw std::invalid_argument("--" + key + " needs a value");
        std::size_t pos = 0;
        long v = std::stol(*it->second, &pos);
        if (pos != it->second->size())
            throw std::invalid_argument("--" + key + ": bad integer '" + *it->second + "'");
        return v;
    }

    const std::vector<std::string>& positional() const { return m_positional; }

    void reject_unknown(std::initializer_list<const char*> known) const
    {
        for (const auto& [key, value] : m_flags) {
            bool ok = false;
            for (const char* k : known)
                if (key == k) ok = true;
            if (!ok) throw std::invalid_argument("unknown option --" + key);
        }
    }

private:
    std::map<std::string, std::optional<std::string>> m_flags;
    std::vector<std::string> m_positional;
};

std::ostream& open_sink(const std::string& path, std::ofstream& file)
{
    if (path.empty()) return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + path);
    return file;
}

int cmd_markov(const Args& args)
{
    args.reject_unknown({"variant", "lambda1", "lambda2", "mu", "truncation", "kmax",
                         "closed-form", "out", "help"});
    const std::string variant_name = args.get_string("variant", "honest");
    forkdyn::Variant variant;
    if (variant_name == "honest")
        variant = forkdyn::Variant::honest;
    else if (variant_name == "selfish")
        variant = forkdyn::Variant::selfish;
    else
        throw std::invalid_argument("--variant must be honest or selfish");

    forkdyn::ChainRates rates{args.get_double("lambda1", 0.6), args.get_double("lambda2", 5.4),
                              args.get_double("mu", 285.0)};
    const int truncation = static_cast<int>(args.get_long("truncation", 20));
    const int kmax = static_cast<int>(args.get_long("kmax", 3));
    if (kmax < 0 || kmax > truncation)
        throw std::invalid_argument("--kmax must lie in [0, truncation]");

    std::ofstream file;
    std::ostream& out = open_sink(args.get_string("out", ""), file);
    out << "k,l,pi\n";
    if (args.has("closed-form")) {
        if (variant != forkdyn::Variant::honest)
            throw std::invalid_argument("--closed-form applies to the honest variant only");
        auto gen = forkdyn::build_generator(rates, variant, truncation);
        auto pi = forkdyn::solve_stationary(gen);
        const double pi00 = pi.pi(0, 0);
        for (int k = 0; k <= kmax; ++k)
            for (int l = 0; l <= kmax; ++l)
                out << k << ',' << l << ','
                    << forkdyn::format_value(pi00 * forkdyn::closed_form_pi(rates, k, l)) << '\n';
        out << "-1,-1," << forkdyn::format_value(forkdyn::orphan_rate(pi, rates)) << '\n';
    } else {
        auto gen = forkdyn::build_generator(rates, variant, truncation);
        auto pi = forkdyn::solve_stationary(gen);
        for (int k = 0; k <= kmax; ++k)
            for (int l = 0; l <= kmax; ++l)
                out << k << ',' << l << ',' << forkdyn::format_value(pi.pi(k, l)) << '\n';
        out << "-1,-1," << forkdyn::format_value(forkdyn::orphan_rate(pi, rates)) << '\n';
    }
    out.flush();
    return 0;
}

int cmd_gamma(const Args& args)
{
    args.reject_unknown({"d12", "nu", "k", "sigma", "mode", "samples", "window", "seed", "help"});
    if (!args.has("d12") || !args.has("nu"))
        throw std::invalid_argument("gamma requires --d12 and --nu");
    forkdyn::SpatialParams params{args.get_double("d12", 0.0), args.get_double("nu", 0.0),
                                  args.get_double("k", 50.0), args.get_double("sigma", 1.0)};
    const std::string mode = args.get_string("mode", "tilde");
    if (mode == "tilde") {
        std::cout << "gamma_tilde " << forkdyn::format_value(forkdyn::gamma_tilde(params))
                  << '\n';
    } else if (mode == "all") {
        std::cout << "gamma " << forkdyn::format_value(forkdyn::gamma_all_relays(params))
                  << '\n';
    } else if (mode == "mc-nearest" || mode == "mc-all") {
        auto est = forkdyn::monte_carlo_gamma(
            params,
            mode == "mc-nearest" ? forkdyn::GammaMode::nearest : forkdyn::GammaMode::all,
            static_cast<long>(args.get_long("samples", 100000)),
            args.get_double("window", 0.0), static_cast<uint64_t>(args.get_long("seed", 1)));
        std::cout << (mode == "mc-nearest" ? "gamma_tilde_mc " : "gamma_mc ")
                  << forkdyn::format_value(est.estimate) << " stderr "
                  << forkdyn::format_value(est.stderr_) << '\n';
    } else {
        throw std::invalid_argument("--mode must be tilde, all, mc-nearest or mc-all");
    }
    return 0;
}

void print_metric(std::ostream& out, const char* name, const forkdyn::Stat& s)
{
    out << name << ',' << forkdyn::format_value(s.mean) << ','
        << forkdyn::format_value(s.half_width) << '\n';
}

std::string opt_or_empty(const std::optional<double>& v)
{
    return v ? forkdyn::format_value(*v) : std::string();
}

int cmd_simulate(const Args& args)
{
    args.reject_unknown({"nodes", "alpha", "area", "rate", "blocks", "delay", "cv", "cap",
                         "seed", "reps", "threads", "event-log", "out", "out-dir", "help"});
    forkdyn::SimConfig cfg;
    cfg.n_nodes = static_cast<int>(args.get_long("nodes", cfg.n_nodes));
    cfg.pool_fraction = args.get_double("alpha", cfg.pool_fraction);
    cfg.area_side = args.get_double("area", cfg.area_side);
    cfg.block_rate = args.get_double("rate", cfg.block_rate);
    cfg.n_blocks = args.get_long("blocks", cfg.n_blocks);
    cfg.mean_delay_target = args.get_double("delay", cfg.mean_delay_target);
    cfg.cv = args.get_double("cv", cfg.cv);
    cfg.runaway_cap = static_cast<int>(args.get_long("cap", cfg.runaway_cap));
    cfg.seed = static_cast<uint64_t>(args.get_long("seed", 1));
    const int reps = static_cast<int>(args.get_long("reps", 1));
    const int threads = static_cast<int>(args.get_long("threads", 0));
    const std::string log_path = args.get_string("event-log", "");
    cfg.validate();

    std::ofstream file;
    std::ostream& out = open_sink(args.get_string("out", ""), file);
    out << "metric,value,ci95\n";
    if (reps == 1) {
        std::ofstream log_file;
        std::ostream* log = nullptr;
        if (!log_path.empty()) {
            log_file.open(log_path, std::ios::binary);
            if (!log_file) throw std::runtime_error("cannot open " + log_path);
            log = &log_file;
        }
        auto report = forkdyn::summarize(forkdyn::run_simulation(cfg, log));
        auto row = [&](const char* name, double v) {
            out << name << ',' << forkdyn::format_value(v) << ",\n";
        };
        row("splits_per_day", report.splits_per_day);
        row("mean_dwell_s", report.mean_dwell_s);
        row("n_races", static_cast<double>(report.n_races));
        if (report.gamma_hat) row("gamma_hat", *report.gamma_hat);
        if (report.big_gamma_hat) row("big_gamma_hat", *report.big_gamma_hat);
        row("r_pool", report.r_pool);
        row("blocks_per_hour_pool", report.blocks_per_hour_pool);
        row("blocks_per_hour_honest", report.blocks_per_hour_honest);
        row("blocks_per_hour_total", report.blocks_per_hour_total);
        if (report.revenue_pool_per_miner_hour)
            row("revenue_pool_btc_per_miner_hour", *report.revenue_pool_per_miner_hour);
        row("revenue_honest_btc_per_miner_hour", report.revenue_honest_per_miner_hour);
    } else {
        if (!log_path.empty())
            throw std::invalid_argument("--event-log requires --reps 1");
        auto agg = forkdyn::replicate(cfg, reps, threads);
        print_metric(out, "splits_per_day", agg.splits_per_day);
        print_metric(out, "mean_dwell_s", agg.mean_dwell_s);
        print_metric(out, "n_races", agg.n_races);
        if (agg.gamma_hat) print_metric(out, "gamma_hat", *agg.gamma_hat);
        if (agg.big_gamma_hat) print_metric(out, "big_gamma_hat", *agg.big_gamma_hat);
        print_metric(out, "r_pool", agg.r_pool);
        print_metric(out, "blocks_per_hour_pool", agg.blocks_per_hour_pool);
        print_metric(out, "blocks_per_hour_honest", agg.blocks_per_hour_honest);
        print_metric(out, "blocks_per_hour_total", agg.blocks_per_hour_total);
        if (agg.revenue_pool_per_miner_hour)
            print_metric(out, "revenue_pool_btc_per_miner_hour",
                         *agg.revenue_pool_per_miner_hour);
        print_metric(out, "revenue_honest_btc_per_miner_hour",
                     agg.revenue_honest_per_miner_hour);
        const std::string out_dir = args.get_string("out-dir", "");
        if (!out_dir.empty()) {
            forkdyn::ResultTable summary;
            summary.columns = {"metric", "mean", "ci95", "n_reps"};
            const std::string reps_s = std::to_string(reps);
            auto srow = [&](const char* name, const forkdyn::Stat& s) {
                summary.add_row({name, forkdyn::format_value(s.mean),
                                 forkdyn::format_value(s.half_width), reps_s});
            };
            srow("splits_per_day", agg.splits_per_day);
            srow("mean_dwell_s", agg.mean_dwell_s);
            srow("n_races", agg.n_races);
            if (agg.gamma_hat) srow("gamma_hat", *agg.gamma_hat);
            if (agg.big_gamma_hat) srow("big_gamma_hat", *agg.big_gamma_hat);
            srow("r_pool", agg.r_pool);
            srow("blocks_per_hour_pool", agg.blocks_per_hour_pool);
            srow("blocks_per_hour_honest", agg.blocks_per_hour_honest);
            srow("blocks_per_hour_total", agg.blocks_per_hour_total);
            if (agg.revenue_pool_per_miner_hour)
                srow("revenue_pool_btc_per_miner_hour", *agg.revenue_pool_per_miner_hour);
            srow("revenue_honest_btc_per_miner_hour", agg.revenue_honest_per_miner_hour);

            forkdyn::ResultTable reps_table;
            reps_table.columns = {"rep", "splits_per_day", "mean_dwell_s", "n_races",
                                  "gamma_hat", "big_gamma_hat", "r_pool",
                                  "blocks_per_hour_pool", "blocks_per_hour_honest",
                                  "blocks_per_hour_total", "revenue_pool_btc_per_miner_hour",
                                  "revenue_honest_btc_per_miner_hour"};
            for (int i = 0; i < reps; ++i) {
                const auto& r = agg.per_rep[i];
                reps_table.add_row(
                    {std::to_string(i), forkdyn::format_value(r.splits_per_day),
                     forkdyn::format_value(r.mean_dwell_s), std::to_string(r.n_races),
                     opt_or_empty(r.gamma_hat), opt_or_empty(r.big_gamma_hat),
                     forkdyn::format_value(r.r_pool),
                     forkdyn::format_value(r.blocks_per_hour_pool),
                     forkdyn::format_value(r.blocks_per_hour_honest),
                     forkdyn::format_value(r.blocks_per_hour_total),
                     opt_or_empty(r.revenue_pool_per_miner_hour),
                     forkdyn::format_value(r.revenue_honest_per_miner_hour)});
            }
            for (const auto& f : forkdyn::write_result_table(summary, out_dir, "summary"))
                std::cerr << f << '\n';
            for (const auto& f :
                 forkdyn::write_result_table(reps_table, out_dir, "replications"))
                std::cerr << f << '\n';
        }
    }
    out.flush();
    return 0;
}

int cmd_reproduce(const Args& args)
{
    args.reject_unknown({"out-dir", "threads", "seed", "quiet", "list", "help"});
    if (args.has("list")) {
        for (const auto& name : forkdyn::list_presets()) std::cout << name << '\n';
        return 0;
    }
    if (args.positional().size() != 1)
        throw std::invalid_argument("reproduce needs exactly one preset name (see --list)");
    const std::string out_dir = args.get_string("out-dir", "results");
    const int threads = static_cast<int>(args.get_long("threads", 0));
    const uint64_t seed = static_cast<uint64_t>(args.get_long("seed", 0));
    std::ostream* log = args.has("quiet") ? nullptr : &std::cerr;
    auto files = forkdyn::run_preset(args.positional()[0], out_dir, threads, log, seed);
    for (const auto& f : files) std::cout << f << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    if (argc < 2) {
        std::cerr << TOP_USAGE;
        return 2;
    }
    const std::string cmd = argv[1];
    if (cmd == "--help" || cmd == "help" || cmd == "-h") {
        std::cout << TOP_USAGE;
        return 0;
    }
    try {
        Args args(argc, argv, 2);
        if (cmd == "markov") {
            if (args.has("help")) {
                std::cout << MARKOV_USAGE;
                return 0;
            }
            return cmd_markov(args);
        }
        if (cmd == "gamma") {
            if (args.has("help")) {
                std::cout << GAMMA_USAGE;
                return 0;
            }
            return cmd_gamma(args);
        }
        if (cmd == "simulate") {
            if (args.has("help")) {
                std::cout << SIMULATE_USAGE;
                return 0;
            }
            return cmd_simulate(args);
        }
        if (cmd == "reproduce") {
            if (args.has("help")) {
                std::cout << REPRODUCE_USAGE;
                return 0;
            }
            return cmd_reproduce(args);
        }
        std::cerr << "forkdyn: unknown command '" << cmd << "'\n" << TOP_USAGE;
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "forkdyn: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "forkdyn: " << e.what() << '\n';
        return 1;
    }
}
