#include "ctlab/conv_code.hpp"

#include <array>
#include <cstdint>
#include <limits>

#include "ctlab/errors.hpp"

namespace ctlab {

namespace {

constexpr int kMemory = kConvConstraintLen - 1;  // 3 delay elements
constexpr int kStates = 1 << kMemory;

inline uint8_t parity4(unsigned x)
{
    x ^= x >> 2;
    x ^= x >> 1;
    return static_cast<uint8_t>(x & 1u);
}

// Output pair for (input bit, state). State bits: s0 = most recent input.
inline uint8_t branch_out(unsigned gen, unsigned input, unsigned state)
{
    const unsigned window = (input & 1u) | (state << 1);  // bit0=in, bits1..3=delays
    return parity4(window & gen);
}

}  // namespace

BitVec conv_encode(const BitVec& in)
{
    BitVec out;
    out.reserve(2 * (in.size() + kConvTailBits));
    unsigned state = 0;
    auto push = [&](unsigned bit) {
        out.push_back(branch_out(kConvGen0, bit, state));
        out.push_back(branch_out(kConvGen1, bit, state));
        state = ((state << 1) | (bit & 1u)) & (kStates - 1);
    };
    for (uint8_t b : in)
        push(b);
    for (int i = 0; i < kConvTailBits; ++i)
        push(0);
    return out;
}

BitVec conv_decode(const BitVec& coded)
{
    if (coded.size() % 2 != 0 || coded.size() < 2 * (1 + kConvTailBits))
        throw FramingError("convolutional block length is not a valid encoder output length");

    const size_t n_steps = coded.size() / 2;
    constexpr uint32_t kInf = std::numeric_limits<uint32_t>::max() / 2;

    std::array<uint32_t, kStates> metric{};
    metric.fill(kInf);
    metric[0] = 0;  // encoder starts in the zero state

    // survivor[t] bit s set => best path into state s at step t used input 1
    std::vector<uint8_t> survivor_input(n_steps * kStates);
    std::vector<uint8_t> survivor_prev(n_steps * kStates);

    std::array<uint32_t, kStates> next{};
    for (size_t t = 0; t < n_steps; ++t) {
        next.fill(kInf);
        const uint8_t r0 = coded[2 * t];
        const uint8_t r1 = coded[2 * t + 1];
        for (unsigned s = 0; s < kStates; ++s) {
            if (metric[s] >= kInf)
                continue;
            for (unsigned bit = 0; bit < 2; ++bit) {
                const uint8_t o0 = branch_out(kConvGen0, bit, s);
                const uint8_t o1 = branch_out(kConvGen1, bit, s);
                const uint32_t m = metric[s] + (o0 != r0) + (o1 != r1);
                const unsigned ns = ((s << 1) | bit) & (kStates - 1);
                // Strictly-less keeps the tie broken toward the lower
                // predecessor state, which is visited first.
                if (m < next[ns]) {
                    next[ns] = m;
                    survivor_input[t * kStates + ns] = static_cast<uint8_t>(bit);
                    survivor_prev[t * kStates + ns] = static_cast<uint8_t>(s);
                }
            }
        }
        metric = next;
    }

    // Traceback from the flushed (zero) state.
    BitVec decoded(n_steps);
    unsigned s = 0;
    for (size_t t = n_steps; t-- > 0;) {
        decoded[t] = survivor_input[t * kStates + s];
        s = survivor_prev[t * kStates + s];
    }
    decoded.resize(n_steps - kConvTailBits);  // drop tail
    return decoded;
}

}  // namespace ctlab
