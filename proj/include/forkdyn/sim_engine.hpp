// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef FORKDYN_SIM_ENGINE_H
#define FORKDYN_SIM_ENGINE_H

#include <forkdyn/block_tree.hpp>
#include <forkdyn/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace forkdyn {

//! Mean distance between two uniform points on the unit square.
inline constexpr double UNIT_SQUARE_MEAN_DISTANCE = 0.5214054331647207;

//! Minimum transmission delay in seconds (clamps degenerate normal samples).
inline constexpr double DELAY_FLOOR = 1e-6;

struct SimConfig {
    int n_nodes{1000};
    double pool_fraction{0.0};       //!< fraction of nodes mining selfishly, in [0, 0.5]
    double area_side{1000.0};
    double block_rate{6.0};          //!< blocks per hour
    long n_blocks{10000};            //!< mining events per run
    double mean_delay_target{10.0};  //!< seconds, mean over a uniform node pair
    double cv{0.0};                  //!< coefficient of variation of each delay
    uint64_t seed{1};
    int runaway_cap{5};

    void validate() const
    {
        if (n_nodes < 2) throw std::invalid_argument("n_nodes >= 2 required");
        if (!(pool_fraction >= 0.0 && pool_fraction <= 0.5))
            throw std::invalid_argument("pool_fraction in [0, 0.5] required");
        if (!(area_side > 0.0)) throw std::invalid_argument("area_side > 0 required");
        if (!(block_rate > 0.0)) throw std::invalid_argument("block_rate > 0 required");
        if (n_blocks < 1) throw std::invalid_argument("n_blocks >= 1 required");
        if (mean_delay_target < 0.0) throw std::invalid_argument("mean_delay_target >= 0");
        if (cv < 0.0) throw std::invalid_argument("cv >= 0 required");
        if (runaway_cap < 1) throw std::invalid_argument("runaway_cap >= 1 required");
    }

    double nominal_hours() const { return static_cast<double>(n_blocks) / block_rate; }
};

/** One fork race: the pool's block bp against the community's bh. */
struct RaceEpisode {
    int32_t bp{-1};
    int32_t bh{-1};
    double opened_at{0.0};
    int32_t honest_bp{0};    //!< honest nodes that received bp before bh
    int32_t honest_total{0};
    int8_t resolved{0};      //!< 0 open, 1 next block linked bp, 2 linked bh
};

struct SyncInterval {
    double lost{0.0};
    double regained{0.0};
};

/**
 * Condensed run record: everything metrics need, plus the full block
 * registry. The line-oriented event log (too large to retain in memory at
 * full scale) streams to an optional sink during the run instead.
 */
struct RawTrace {
    BlockStore blocks;
    std::vector<int32_t> final_main;        //!< genesis..tip of node 0 after drain
    std::vector<int64_t> splits_per_node;
    std::vector<SyncInterval> desync;
    std::vector<RaceEpisode> races;
    long mined{0};
    long pool_mined{0};
    long pool_published{0};
    int n_pool_nodes{0};
    double nominal_hours{0.0};
    double end_time{0.0};
    bool final_tips_identical{true};
};

namespace detail {

struct SimEvent {
    double t;
    uint64_t seq;
    int32_t block; //!< -1 for a mining completion
    int32_t dest;
};

struct SimEventLater {
    bool operator()(const SimEvent& a, const SimEvent& b) const
    {
        return a.t != b.t ? a.t > b.t : a.seq > b.seq;
    }
};

/** Shared selfish-pool state (the pool acts as one logical entity). */
struct PoolState {
    std::deque<int32_t> unpublished; //!< secret extension, oldest first
    bool race{false};
    int32_t n_s{0};    //!< height of the pool's mining chain tip
    int32_t n_p{0};    //!< height of the pool's public-chain view
    int32_t tip{GENESIS_ID};
};

class Simulation
{
public:
    Simulation(const SimConfig& cfg, std::ostream* event_log)
        : m_cfg(cfg), m_rng(cfg.seed), m_log(event_log), m_pool_view(&m_store)
    {
        cfg.validate();
        const int n = cfg.n_nodes;
        m_store.reserve(cfg.n_blocks + 2);

        m_x.resize(n);
        m_y.resize(n);
        for (int v = 0; v < n; ++v) {
            m_x[v] = cfg.area_side * m_rng.uniform01();
            m_y[v] = cfg.area_side * m_rng.uniform01();
        }
        m_dist.resize(static_cast<std::size_t>(n) * n);
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                m_dist[static_cast<std::size_t>(u) * n + v] =
                    std::hypot(m_x[u] - m_x[v], m_y[u] - m_y[v]);

        // Pool membership: a seeded shuffle, first floor(alpha n) indices.
        std::vector<int32_t> order(n);
        for (int v = 0; v < n; ++v) order[v] = v;
        for (int v = n - 1; v > 0; --v)
            std::swap(order[v], order[m_rng.uniform_below(static_cast<uint64_t>(v) + 1)]);
        const int n_pool = static_cast<int>(cfg.pool_fraction * n);
        m_is_pool.assign(n, 0);
        for (int j = 0; j < n_pool; ++j) m_is_pool[order[j]] = 1;
        for (int v = 0; v < n; ++v) (m_is_pool[v] ? m_members : m_honest).push_back(v);

        m_slope = cfg.mean_delay_target / (UNIT_SQUARE_MEAN_DISTANCE * cfg.area_side);
        m_rate_sec = cfg.block_rate / 3600.0;

        m_trees.reserve(n);
        for (int v = 0; v < n; ++v) {
            m_trees.emplace_back(&m_store);
            m_trees.back().reserve(cfg.n_blocks + 2);
        }
        m_pool_view.reserve(cfg.n_blocks + 2);

        m_tip_freq.assign(1, n); // all nodes on genesis
        m_distinct_tips = 1;
        m_tie_nodes = 0;
        m_synced = true;
        m_pool_known.assign(1, 1);

        const int ring = RING_SLOTS;
        m_ring.assign(ring, std::vector<double>(n, 0.0));
        m_ring_tag.assign(ring, -1);
        m_aware.resize(m_members.size());

        schedule(m_rng.exponential(m_rate_sec), -1, -1);
    }

    RawTrace run()
    {
        while (!m_queue.empty()) {
            SimEvent e = m_queue.top();
            m_queue.pop();
            m_now = e.t;
            if (e.block < 0)
                on_mine();
            else
                on_arrival(e.block, e.dest);
        }
        return finish();
    }

private:
    static constexpr int RING_SLOTS = 128;

    // ---- event plumbing -------------------------------------------------

    void schedule(double t, int32_t block, int32_t dest)
    {
        m_queue.push(SimEvent{t, m_seq++, block, dest});
    }

    void log_line(const char* type, int32_t node, int32_t block, int32_t parent)
    {
        if (!m_log) return;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%.6f %s %d %d %d\n", m_now, type, node, block, parent);
        *m_log << buf;
    }

    double sample_delay(double d)
    {
        double v = m_cfg.cv == 0.0 ? m_slope * d
                                   : m_rng.normal(m_slope * d, m_cfg.cv * m_slope * d);
        return v < DELAY_FLOOR ? DELAY_FLOOR : v;
    }

    // ---- mining ----------------------------------------------------------

    void on_mine()
    {
        const int32_t winner = static_cast<int32_t>(m_rng.uniform_below(m_cfg.n_nodes));
        ++m_mined;
        if (m_is_pool[winner])
            pool_mine(winner);
        else
            honest_mine(winner);
        if (m_mined < m_cfg.n_blocks) schedule(m_now + m_rng.exponential(m_rate_sec), -1, -1);
    }

    void honest_mine(int32_t winner)
    {
        const int32_t parent = m_trees[winner].main_tip();
        const int32_t id = new_block(parent, winner, false, m_now);
        log_line("mine", winner, id, parent);
        resolve_races(parent, id);
        attach_at(winner, id);
        broadcast(id, winner);
    }

    void pool_mine(int32_t winner)
    {
        const int32_t parent = m_pool.tip;
        const int32_t id = new_block(parent, winner, true, TIME_PENDING);
        ++m_pool_mined;
        log_line("mine", winner, id, parent);
        resolve_races(parent, id);
        m_pool.unpublished.push_back(id);
        m_pool.n_s = m_store[id].height;
        m_pool.tip = id;
        if (m_pool.race) {
            // Winning the race: the decisive block goes out immediately.
            publish(m_pool.unpublished, -1, -1, /*instant=*/true);
            m_pool.unpublished.clear();
            m_pool.race = false;
        } else if (static_cast<int>(m_pool.unpublished.size()) > m_cfg.runaway_cap) {
            publish_front(/*instant=*/true, -1);
        }
    }

    int32_t new_block(int32_t parent, int32_t miner, bool pool_origin, double published_at)
    {
        int32_t id = m_store.add_block(parent, miner, pool_origin, m_now, published_at);
        m_tip_freq.push_back(0);
        m_pool_known.push_back(pool_origin ? 1 : 0);
        return id;
    }

    // ---- propagation -----------------------------------------------------

    /** Direct broadcast from the miner to every other node. */
    void broadcast(int32_t id, int32_t origin)
    {
        const int n = m_cfg.n_nodes;
        auto& sched = m_ring[id % RING_SLOTS];
        m_ring_tag[id % RING_SLOTS] = id;
        const double* drow = &m_dist[static_cast<std::size_t>(origin) * n];
        for (int dest = 0; dest < n; ++dest) {
            if (dest == origin) {
                sched[dest] = m_now;
                continue;
            }
            double t = m_now + sample_delay(drow[dest]);
            sched[dest] = t;
            schedule(t, id, dest);
        }
    }

    /**
     * Publication of secret blocks. Every pool member re-broadcasts its
     * copy the moment it becomes aware of the publication: immediately for
     * mining-triggered publications, and at its own arrival of the
     * triggering public block otherwise. Each honest node therefore
     * receives the block at the minimum over members of
     * awareness + transmission delay.
     */
    void publish(const std::deque<int32_t>& ids, int32_t race_bp, int32_t trigger, bool instant)
    {
        const int n = m_cfg.n_nodes;
        const std::size_t np = m_members.size();
        const double* trig_sched = nullptr;
        if (instant) {
            for (std::size_t j = 0; j < np; ++j) m_aware[j] = m_now;
        } else {
            int slot = trigger % RING_SLOTS;
            if (m_ring_tag[slot] == trigger) {
                const auto& sched = m_ring[slot];
                for (std::size_t j = 0; j < np; ++j) m_aware[j] = sched[m_members[j]];
                trig_sched = sched.data();
            } else {
                for (std::size_t j = 0; j < np; ++j) m_aware[j] = m_now;
            }
        }

        RaceEpisode* episode = nullptr;
        if (race_bp >= 0) {
            m_races.push_back(RaceEpisode{race_bp, trigger, m_now, 0, 0, 0});
            m_open_races.push_back(static_cast<int32_t>(m_races.size()) - 1);
            episode = &m_races.back();
        }

        for (int32_t id : ids) {
            m_store.mutable_block(id).published_at = m_now;
            ++m_pool_published;
            log_line("publish", m_store[id].miner, id, m_store[id].parent);
            attach_pool_view(id);
            if (instant)
                for (int32_t member : m_members) attach_at(member, id);
            else
                m_gates[trigger].push_back(id);

            // Fold the per-member relays into one arrival per honest node.
            const bool tally = episode && id == race_bp;
            for (int32_t dest : m_honest) {
                double t = fold_arrival(dest);
                // With cv = 0 every relay path starts with the trigger
                // reaching the member, and delays are proportional to
                // distance, so the triangle inequality bounds the fold
                // from below by the trigger's own arrival at dest. Clamp
                // to that bound: summing absolute times can round a few
                // ulp below it for nearly collinear placements.
                if (m_cfg.cv == 0.0 && trig_sched && t < trig_sched[dest])
                    t = trig_sched[dest];
                schedule(t, id, dest);
                if (tally) {
                    ++episode->honest_total;
                    // Strict: at equal times the event queue delivers the
                    // trigger first (it was scheduled earlier), so the node
                    // keeps mining on it and bp did not hijack it.
                    if (trig_sched && t < trig_sched[dest]) ++episode->honest_bp;
                }
            }
        }
        m_pool.n_p = std::max(m_pool.n_p, m_pool_view.main_height());
    }

    void publish_front(bool instant, int32_t trigger)
    {
        std::deque<int32_t> one;
        one.push_back(m_pool.unpublished.front());
        m_pool.unpublished.pop_front();
        publish(one, -1, trigger, instant);
    }

    /** Earliest arrival of a relayed block at `dest` over all pool members. */
    double fold_arrival(int32_t dest)
    {
        const int n = m_cfg.n_nodes;
        const std::size_t np = m_members.size();
        const double* drow = &m_dist[static_cast<std::size_t>(dest) * n]; // symmetric
        if (m_cfg.cv == 0.0) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < np; ++j) {
                double d = drow[m_members[j]];
                double delay = m_slope * d;
                if (delay < DELAY_FLOOR) delay = DELAY_FLOOR;
                best = std::min(best, m_aware[j] + delay);
            }
            return best;
        }
        // With noise, only members within 8 sigma of the deterministic
        // optimum can win; sample delays just for those.
        const double beta = m_cfg.cv * m_slope;
        double bound = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < np; ++j) {
            double d = drow[m_members[j]];
            bound = std::min(bound, m_aware[j] + m_slope * d + 8.0 * beta * d);
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < np; ++j) {
            double d = drow[m_members[j]];
            if (m_aware[j] + m_slope * d - 8.0 * beta * d > bound) continue;
            double delay = m_rng.normal(m_slope * d, beta * d);
            if (delay < DELAY_FLOOR) delay = DELAY_FLOOR;
            best = std::min(best, m_aware[j] + delay);
        }
        return best;
    }

    // ---- arrivals ----------------------------------------------------------

    void on_arrival(int32_t id, int32_t dest)
    {
        if (m_is_pool[dest]) {
            if (!m_pool_known[id]) {
                m_pool_known[id] = 1;
                attach_pool_view(id);
                // A parked-child flush can raise the public view by more
                // than one height at once; the pool reacts step by step.
                while (m_pool.n_p < m_pool_view.main_height()) {
                    ++m_pool.n_p;
                    pool_public_advance(id);
                }
            }
            auto gate = m_gates.find(id);
            if (gate != m_gates.end())
                for (int32_t b : gate->second) attach_at(dest, b);
        }
        attach_at(dest, id);
    }

    void attach_pool_view(int32_t id) { m_pool_view.attach(id); }

    /** Algorithm-1 response to a public block extending the pool's view. */
    void pool_public_advance(int32_t trigger)
    {
        const int delta = m_pool.n_s - m_pool.n_p;
        if (delta <= -1) {
            m_pool.unpublished.clear();
            m_pool.race = false;
            m_pool.tip = m_pool_view.main_tip();
            m_pool.n_s = m_pool_view.main_height();
            m_pool.n_p = m_pool.n_s;
        } else if (delta == 0) {
            if (!m_pool.unpublished.empty()) {
                int32_t bp = m_pool.unpublished.back();
                log_line("race", -1, bp, trigger);
                publish(m_pool.unpublished, bp, trigger, /*instant=*/false);
                m_pool.unpublished.clear();
                m_pool.race = true; // pool keeps mining on bp (== m_pool.tip)
            }
        } else if (delta == 1) {
            if (m_pool.unpublished.size() == 2) {
                publish(m_pool.unpublished, -1, trigger, /*instant=*/false);
                m_pool.unpublished.clear();
            }
        } else if (!m_pool.unpublished.empty()) {
            publish_front(/*instant=*/false, trigger);
        }
    }

    // ---- per-node attachment and global synchronization --------------------

    void attach_at(int32_t node, int32_t id)
    {
        BlockTree& tree = m_trees[node];
        const int32_t old_tip = tree.main_tip();
        const bool old_tie = tree.tie_count() > 0;
        AttachOutcome out = tree.attach(id);
        if (m_log) {
            const char* type = out.kind == AttachKind::duplicate ? "dup"
                               : out.kind == AttachKind::detached ? "detach"
                                                                  : "attach";
            log_line(type, node, id, m_store[id].parent);
        }
        if (out.kind == AttachKind::duplicate || out.kind == AttachKind::detached) return;
        const int32_t new_tip = tree.main_tip();
        const bool new_tie = tree.tie_count() > 0;
        if (new_tip != old_tip) {
            if (--m_tip_freq[old_tip] == 0) --m_distinct_tips;
            if (m_tip_freq[new_tip]++ == 0) ++m_distinct_tips;
        }
        if (new_tie != old_tie) m_tie_nodes += new_tie ? 1 : -1;
        update_sync();
    }

    void update_sync()
    {
        const bool now_synced = m_distinct_tips == 1 && m_tie_nodes == 0;
        if (now_synced == m_synced) return;
        m_synced = now_synced;
        if (!now_synced) {
            m_desync.push_back(SyncInterval{m_now, -1.0});
            log_line("desync", -1, -1, -1);
        } else {
            m_desync.back().regained = m_now;
            log_line("sync", -1, -1, -1);
        }
    }

    /** Close any open race whose tip was just mined on. */
    void resolve_races(int32_t parent, int32_t /*id*/)
    {
        if (m_open_races.empty()) return;
        for (std::size_t i = 0; i < m_open_races.size();) {
            RaceEpisode& ep = m_races[m_open_races[i]];
            if (parent == ep.bp || parent == ep.bh) {
                ep.resolved = parent == ep.bp ? 1 : 2;
                m_open_races[i] = m_open_races.back();
                m_open_races.pop_back();
            } else {
                ++i;
            }
        }
    }

    // ---- termination --------------------------------------------------------

    RawTrace finish()
    {
        if (!m_synced && !m_desync.empty() && m_desync.back().regained < 0.0)
            m_desync.back().regained = m_now;

        RawTrace trace;
        trace.blocks = std::move(m_store);
        trace.splits_per_node.reserve(m_trees.size());
        int32_t tip0 = m_trees[0].main_tip();
        trace.final_tips_identical = true;
        for (const auto& tree : m_trees) {
            trace.splits_per_node.push_back(tree.split_count());
            if (tree.main_tip() != tip0) trace.final_tips_identical = false;
        }
        for (int32_t b = tip0; b >= 0; b = trace.blocks[b].parent) trace.final_main.push_back(b);
        std::reverse(trace.final_main.begin(), trace.final_main.end());
        if (m_log)
            for (int32_t b : trace.final_main) log_line("main", -1, b, trace.blocks[b].parent);
        trace.desync = std::move(m_desync);
        trace.races = std::move(m_races);
        trace.mined = m_mined;
        trace.pool_mined = m_pool_mined;
        trace.pool_published = m_pool_published;
        trace.n_pool_nodes = static_cast<int>(m_members.size());
        trace.nominal_hours = m_cfg.nominal_hours();
        trace.end_time = m_now;
        return trace;
    }

    // ---- data -----------------------------------------------------------------

    SimConfig m_cfg;
    RandomStream m_rng;
    std::ostream* m_log;

    BlockStore m_store;
    std::vector<BlockTree> m_trees;
    BlockTree m_pool_view;
    PoolState m_pool;

    std::vector<double> m_x, m_y, m_dist;
    std::vector<uint8_t> m_is_pool;
    std::vector<int32_t> m_members, m_honest;
    double m_slope{0.0};
    double m_rate_sec{0.0};

    std::priority_queue<SimEvent, std::vector<SimEvent>, SimEventLater> m_queue;
    uint64_t m_seq{0};
    double m_now{0.0};

    std::vector<std::vector<double>> m_ring;
    std::vector<int32_t> m_ring_tag;
    std::vector<double> m_aware;
    std::unordered_map<int32_t, std::vector<int32_t>> m_gates;

    std::vector<int32_t> m_tip_freq;
    std::vector<uint8_t> m_pool_known;
    int m_distinct_tips{1};
    int m_tie_nodes{0};
    bool m_synced{true};
    std::vector<SyncInterval> m_desync;

    std::vector<RaceEpisode> m_races;
    std::vector<int32_t> m_open_races;

    long m_mined{0};
    long m_pool_mined{0};
    long m_pool_published{0};
};

} // namespace detail

/**
 * Runs one replication to completion: n_blocks mining events, then a
 * drain of all in-flight deliveries. The optional sink receives the
 * line-oriented event log (`time type node block parent`).
 */
inline RawTrace run_simulation(const SimConfig& cfg, std::ostream* event_log = nullptr)
{
    detail::Simulation sim(cfg, event_log);
    return sim.run();
}

} // namespace forkdyn

#endif // FORKDYN_SIM_ENGINE_H
