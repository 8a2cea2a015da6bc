#include "ris/control/partition.hpp"

#include "ris/error.hpp"

namespace ris::control {

void require_partitionable(const ArrayGeometry& geom) {
  geom.validate();
  if (geom.block_count() > kMaxBlocks) {
    throw Error(ErrorCode::kInvalidArgument, "tiling has more than 16 blocks", {{"blocks", geom.block_count()}});
  }
  if (geom.block_rows * geom.block_cols > 64) {
    throw Error(ErrorCode::kInvalidArgument, "block has more than 64 elements",
                {{"block_rows", geom.block_rows}, {"block_cols", geom.block_cols}});
  }
}

BlockAddress tile_address(const ArrayGeometry& geom, std::size_t tile_row, std::size_t tile_col) {
  return BlockAddress(static_cast<unsigned>(tile_row * geom.tile_cols + tile_col));
}

BlockPayload pack_block(const PhaseConfig& global, const ArrayGeometry& geom, std::size_t tile_row,
                        std::size_t tile_col) {
  BlockPayload out{};
  std::size_t bit = 0;
  for (std::size_t r = 0; r < geom.block_rows; ++r) {
    for (std::size_t c = 0; c < geom.block_cols; ++c, ++bit) {
      if (global.on(tile_row * geom.block_rows + r, tile_col * geom.block_cols + c)) {
        out[bit / 8] |= static_cast<std::uint8_t>(0x80U >> (bit % 8));
      }
    }
  }
  return out;
}

std::map<BlockAddress, BlockPayload> partition_config(const PhaseConfig& global, const ArrayGeometry& geom) {
  require_partitionable(geom);
  global.require_matches(geom);
  std::map<BlockAddress, BlockPayload> out;
  for (std::size_t i = 0; i < geom.tile_rows; ++i) {
    for (std::size_t j = 0; j < geom.tile_cols; ++j) out.emplace(tile_address(geom, i, j), pack_block(global, geom, i, j));
  }
  return out;
}

PhaseConfig reassemble_config(const std::map<BlockAddress, BlockPayload>& blocks, const ArrayGeometry& geom) {
  require_partitionable(geom);
  PhaseConfig global = PhaseConfig::all_off(geom);
  for (std::size_t i = 0; i < geom.tile_rows; ++i) {
    for (std::size_t j = 0; j < geom.tile_cols; ++j) {
      const BlockAddress addr = tile_address(geom, i, j);
      const auto it = blocks.find(addr);
      if (it == blocks.end()) {
        throw Error(ErrorCode::kInvalidArgument, "missing payload for block", {{"address", addr.value()}});
      }
      std::size_t bit = 0;
      for (std::size_t r = 0; r < geom.block_rows; ++r) {
        for (std::size_t c = 0; c < geom.block_cols; ++c, ++bit) {
          const bool on = (it->second[bit / 8] & (0x80U >> (bit % 8))) != 0;
          global.set(i * geom.block_rows + r, j * geom.block_cols + c, on);
        }
      }
    }
  }
  return global;
}

}  // namespace ris::control
