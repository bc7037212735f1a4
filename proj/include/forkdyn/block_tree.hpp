// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef FORKDYN_BLOCK_TREE_H
#define FORKDYN_BLOCK_TREE_H

#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace forkdyn {

constexpr int32_t GENESIS_ID = 0;
constexpr double TIME_PENDING = -1.0;

/** Immutable block record; id equals the index in the BlockStore. */
struct Block {
    int32_t parent{-1};
    int32_t height{0};
    int32_t miner{-1};
    bool pool_origin{false};
    double mined_at{0.0};
    double published_at{0.0}; //!< TIME_PENDING while withheld
};

/**
 * Append-only registry of all blocks in a simulation, shared by every
 * per-node tree (block identity is global; attachment is per node).
 */
class BlockStore
{
public:
    BlockStore() { m_blocks.push_back(Block{}); } // genesis

    int32_t add_block(int32_t parent, int32_t miner, bool pool_origin, double mined_at,
                      double published_at)
    {
        if (parent < 0 || parent >= static_cast<int32_t>(m_blocks.size()))
            throw std::invalid_argument("unknown parent block");
        Block blk;
        blk.parent = parent;
        blk.height = m_blocks[parent].height + 1;
        blk.miner = miner;
        blk.pool_origin = pool_origin;
        blk.mined_at = mined_at;
        blk.published_at = published_at;
        m_blocks.push_back(blk);
        return static_cast<int32_t>(m_blocks.size()) - 1;
    }

    //! Test hook: insert a block with an explicit (possibly wrong) height.
    int32_t add_block_with_height(int32_t parent, int32_t height)
    {
        Block blk;
        blk.parent = parent;
        blk.height = height;
        m_blocks.push_back(blk);
        return static_cast<int32_t>(m_blocks.size()) - 1;
    }

    const Block& operator[](int32_t id) const { return m_blocks[id]; }
    Block& mutable_block(int32_t id) { return m_blocks[id]; }
    int32_t size() const { return static_cast<int32_t>(m_blocks.size()); }
    void reserve(std::size_t n) { m_blocks.reserve(n); }

private:
    std::vector<Block> m_blocks;
};

enum class AttachKind : uint8_t { duplicate, extended_main, side_branch, reorg, detached };

struct AttachOutcome {
    AttachKind kind;
    int32_t reorg_depth{0};   //!< blocks demoted from the old main branch
    bool tip_changed{false};
    bool split{false};        //!< attach created an extra leaf at the current max height
};

/**
 * Per-node view of the block tree with main-branch designation.
 *
 * Update rules: duplicates are rejected; a block with an unknown
 * predecessor is parked and re-attached for free once the parent arrives;
 * a block extending the main tip advances it; a longer side branch
 * triggers a reorg (the main tip simply moves — main-branch membership is
 * implied by ancestry); equal-height competitors stay side branches, so
 * the first-received block keeps the tip.
 */
class BlockTree
{
public:
    explicit BlockTree(const BlockStore* store) : m_store(store)
    {
        m_attached.assign(static_cast<std::size_t>(store->size()), 0);
        m_attached[GENESIS_ID] = 1;
    }

    void reserve(int32_t n_blocks) { m_attached.reserve(n_blocks); }

    int32_t main_tip() const { return m_main_tip; }
    int32_t main_height() const { return m_main_height; }
    //! Number of co-leaves at the current max height beyond the main tip.
    int32_t tie_count() const { return m_tie_count; }
    int64_t split_count() const { return m_splits; }
    bool is_attached(int32_t id) const
    {
        return id < static_cast<int32_t>(m_attached.size()) && m_attached[id];
    }

    /** Attach `id`; recursively re-attaches any children parked on it. */
    AttachOutcome attach(int32_t id)
    {
        const Block& blk = (*m_store)[id];
        if (blk.parent >= 0 && blk.height != (*m_store)[blk.parent].height + 1)
            throw std::runtime_error("malformed block: height mismatch with parent");
        grow(id);
        if (m_attached[id]) return {AttachKind::duplicate};
        if (!m_attached[blk.parent]) {
            m_detached[blk.parent].push_back(id);
            return {AttachKind::detached};
        }
        AttachOutcome outcome = attach_ready(id);
        flush_detached(id);
        return outcome;
    }

private:
    void grow(int32_t id)
    {
        if (id >= static_cast<int32_t>(m_attached.size()))
            m_attached.resize(static_cast<std::size_t>(m_store->size()), 0);
    }

    AttachOutcome attach_ready(int32_t id)
    {
        const Block& blk = (*m_store)[id];
        m_attached[id] = 1;
        AttachOutcome out{AttachKind::side_branch};
        if (blk.parent == m_main_tip) {
            m_main_tip = id;
            m_main_height = blk.height;
            m_tie_count = 0;
            out.kind = AttachKind::extended_main;
            out.tip_changed = true;
        } else if (blk.height > m_main_height) {
            out.kind = AttachKind::reorg;
            out.reorg_depth = m_main_height - fork_height(m_main_tip, id);
            m_main_tip = id;
            m_main_height = blk.height;
            m_tie_count = 0;
            out.tip_changed = true;
        } else if (blk.height == m_main_height) {
            ++m_tie_count;
            ++m_splits;
            out.split = true;
        }
        return out;
    }

    void flush_detached(int32_t id)
    {
        auto it = m_detached.find(id);
        if (it == m_detached.end()) return;
        std::vector<int32_t> ready = std::move(it->second);
        m_detached.erase(it);
        for (int32_t child : ready) {
            attach_ready(child);
            flush_detached(child);
        }
    }

    int32_t fork_height(int32_t a, int32_t b) const
    {
        while ((*m_store)[a].height > (*m_store)[b].height) a = (*m_store)[a].parent;
        while ((*m_store)[b].height > (*m_store)[a].height) b = (*m_store)[b].parent;
        while (a != b) {
            a = (*m_store)[a].parent;
            b = (*m_store)[b].parent;
        }
        return (*m_store)[a].height;
    }

    const BlockStore* m_store;
    std::vector<uint8_t> m_attached;
    std::unordered_map<int32_t, std::vector<int32_t>> m_detached;
    int32_t m_main_tip{GENESIS_ID};
    int32_t m_main_height{0};
    int32_t m_tie_count{0};
    int64_t m_splits{0};
};

} // namespace forkdyn

#endif // FORKDYN_BLOCK_TREE_H
