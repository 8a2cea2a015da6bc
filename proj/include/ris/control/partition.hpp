#pragma once

#include <map>

#include "ris/control/frame.hpp"
#include "ris/geometry.hpp"

namespace ris::control {

inline constexpr std::size_t kMaxBlocks = 16;

/// Address of the block at tile (i, j): i * tile_cols + j.
BlockAddress tile_address(const ArrayGeometry& geom, std::size_t tile_row, std::size_t tile_col);

/// Packs a block_rows x block_cols sub-matrix row-major, MSB-first. Blocks
/// smaller than 8x8 leave the trailing bits zero.
BlockPayload pack_block(const PhaseConfig& global, const ArrayGeometry& geom, std::size_t tile_row,
                        std::size_t tile_col);

/// Splits a global config into one SET_CONFIG payload per block.
std::map<BlockAddress, BlockPayload> partition_config(const PhaseConfig& global, const ArrayGeometry& geom);

/// Inverse of partition_config. Every tile address must be present.
PhaseConfig reassemble_config(const std::map<BlockAddress, BlockPayload>& blocks, const ArrayGeometry& geom);

/// Throws unless the geometry fits the control plane: at most 16 blocks and
/// at most 64 elements per block.
void require_partitionable(const ArrayGeometry& geom);

}  // namespace ris::control
