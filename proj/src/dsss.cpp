#include "ctlab/dsss.hpp"

#include "ctlab/errors.hpp"

namespace ctlab {

namespace {

// Symbol 0 chip sequence, chip c0 first.
constexpr char kSymbol0[] = "11011001110000110101001000101110";

std::array<std::array<uint8_t, 32>, 16> build_table()
{
    std::array<std::array<uint8_t, 32>, 16> table{};
    for (int i = 0; i < 32; ++i)
        table[0][i] = static_cast<uint8_t>(kSymbol0[i] - '0');
    for (int s = 1; s < 8; ++s)
        for (int i = 0; i < 32; ++i)
            table[s][i] = table[s - 1][(i + 28) % 32];  // rotate right by 4
    for (int s = 0; s < 8; ++s)
        for (int i = 0; i < 32; ++i)
            table[s + 8][i] = (i % 2 == 1) ? static_cast<uint8_t>(1 - table[s][i]) : table[s][i];
    return table;
}

}  // namespace

const std::array<std::array<uint8_t, 32>, 16>& dsss_chip_table()
{
    static const auto table = build_table();
    return table;
}

BitVec dsss_spread(const BitVec& bits)
{
    if (bits.size() % 4 != 0)
        throw InvalidInputError("DSSS spreading requires a multiple of 4 bits");
    const auto& table = dsss_chip_table();
    BitVec chips;
    chips.reserve(bits.size() * 8);
    for (size_t i = 0; i < bits.size(); i += 4) {
        const unsigned sym = bits[i] | (bits[i + 1] << 1) | (bits[i + 2] << 2) | (bits[i + 3] << 3);
        chips.insert(chips.end(), table[sym].begin(), table[sym].end());
    }
    return chips;
}

BitVec dsss_despread(const BitVec& chips)
{
    if (chips.size() % 32 != 0)
        throw FramingError("DSSS chip stream length is not a multiple of 32");
    const auto& table = dsss_chip_table();
    BitVec bits;
    bits.reserve(chips.size() / 8);
    for (size_t off = 0; off < chips.size(); off += 32) {
        int best_sym = 0;
        int best_dist = 33;
        for (int sym = 0; sym < 16; ++sym) {
            int d = 0;
            for (int i = 0; i < 32; ++i)
                d += (chips[off + i] != table[sym][i]);
            if (d < best_dist) {  // ties keep the lowest symbol index
                best_dist = d;
                best_sym = sym;
            }
        }
        for (int b = 0; b < 4; ++b)
            bits.push_back(static_cast<uint8_t>((best_sym >> b) & 1));
    }
    return bits;
}

}  // namespace ctlab
