// Copyright (c) 2026 The forkdyn developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef FORKDYN_FORKDYN_H
#define FORKDYN_FORKDYN_H

#include <forkdyn/block_tree.hpp>
#include <forkdyn/chain_model.hpp>
#include <forkdyn/lattice_paths.hpp>
#include <forkdyn/metrics.hpp>
#include <forkdyn/presets.hpp>
#include <forkdyn/quadrature.hpp>
#include <forkdyn/rng.hpp>
#include <forkdyn/sim_engine.hpp>
#include <forkdyn/spatial_gamma.hpp>

#endif // FORKDYN_FORKDYN_H
