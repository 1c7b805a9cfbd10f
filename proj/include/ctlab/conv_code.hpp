#pragma once

#include "ctlab/bits.hpp"

namespace ctlab {

// Rate-1/2, constraint-length-4 non-systematic convolutional code with
// hard-decision Viterbi decoding. The generator taps are kept as named
// constants so the pair can be swapped without touching the trellis code
// (bit 0 = current input, bit k = input delayed by k).
constexpr unsigned kConvGen0 = 0b1101;  // 1 + x^2 + x^3
constexpr unsigned kConvGen1 = 0b1111;  // 1 + x + x^2 + x^3
constexpr int kConvConstraintLen = 4;
constexpr int kConvTailBits = kConvConstraintLen - 1;

// Output length is exactly 2 * (input length + 3 tail bits); the encoder is
// flushed back to the zero state.
BitVec conv_encode(const BitVec& in);

// Hard-decision Viterbi over the same trellis, traceback from the terminated
// (zero) state. `coded.size()` must be even and at least 2 * (1 + tail).
BitVec conv_decode(const BitVec& coded);

}  // namespace ctlab
