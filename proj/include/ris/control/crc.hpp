#pragma once

#include <cstdint>
#include <span>

namespace ris::control {

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final XOR.
std::uint16_t crc16(std::span<const std::uint8_t> bytes);

}  // namespace ris::control
