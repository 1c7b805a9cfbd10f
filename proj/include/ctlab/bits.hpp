#pragma once

#include <cstdint>
#include <vector>

namespace ctlab {

// One bit (or chip) per element, values 0/1.
using BitVec = std::vector<uint8_t>;

// LSB-first per byte, matching the serialization order of the modeled radios.
inline BitVec bytes_to_bits(const std::vector<uint8_t>& bytes)
{
    BitVec bits;
    bits.reserve(bytes.size() * 8);
    for (uint8_t b : bytes)
        for (int i = 0; i < 8; ++i)
            bits.push_back(static_cast<uint8_t>((b >> i) & 1u));
    return bits;
}

inline std::vector<uint8_t> bits_to_bytes(const BitVec& bits)
{
    std::vector<uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits.size(); ++i)
        if (bits[i])
            bytes[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
    return bytes;
}

inline size_t hamming_distance(const BitVec& a, const BitVec& b)
{
    size_t n = a.size() < b.size() ? a.size() : b.size();
    size_t d = a.size() > b.size() ? a.size() - n : b.size() - n;
    for (size_t i = 0; i < n; ++i)
        d += (a[i] != b[i]);
    return d;
}

}  // namespace ctlab
