#pragma once

#include <array>
#include <cstdint>

#include "ctlab/bits.hpp"

namespace ctlab {

// IEEE 802.15.4 (2.4 GHz O-QPSK PHY) 16-symbol x 32-chip spreading table.
// The table is generated from the symbol-0 sequence: symbols 1..7 are
// successive 4-chip right rotations, symbols 8..15 invert the odd-indexed
// chips of symbols 0..7.
const std::array<std::array<uint8_t, 32>, 16>& dsss_chip_table();

// 4-bit symbols, LSB-first within each symbol. Payload bit count must be a
// multiple of 4.
BitVec dsss_spread(const BitVec& bits);

// Minimum-Hamming-distance despreading per 32-chip block; ties resolve to
// the lowest symbol index.
BitVec dsss_despread(const BitVec& chips);

}  // namespace ctlab
