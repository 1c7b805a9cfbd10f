#pragma once

#include <cmath>
#include <cstdint>

namespace ctlab {

// Deterministic PRNG. The standard <random> distributions are
// implementation-defined, which breaks the byte-identical-output contract,
// so the generator and all draws are self-contained.
inline uint64_t splitmix64(uint64_t& state)
{
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(uint64_t seed)
    {
        uint64_t sm = seed;
        for (auto& word : s_)
            word = splitmix64(sm);
        have_cached_gauss_ = false;
    }

    // xoshiro256**
    uint64_t next_u64()
    {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    uint32_t uniform_u32(uint32_t bound)  // in [0, bound)
    {
        return static_cast<uint32_t>((static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    uint8_t bit() { return static_cast<uint8_t>(next_u64() >> 63); }

    // Standard normal, Box-Muller (pairs cached).
    double gaussian()
    {
        if (have_cached_gauss_) {
            have_cached_gauss_ = false;
            return cached_gauss_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_gauss_ = r * std::sin(a);
        have_cached_gauss_ = true;
        return r * std::cos(a);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4];
    double cached_gauss_ = 0.0;
    bool have_cached_gauss_ = false;
};

// Stable seed derivation for independent streams (per packet, per node, ...).
// Order of evaluation never matters: streams are fully determined by the key.
inline uint64_t derive_seed(uint64_t base, uint64_t stream)
{
    uint64_t s = base ^ (0x9e3779b97f4a7c15ull + stream * 0xd1342543de82ef95ull);
    splitmix64(s);
    return splitmix64(s);
}

inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b)
{
    return derive_seed(derive_seed(base, a), b);
}

inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b, uint64_t c)
{
    return derive_seed(derive_seed(base, a, b), c);
}

}  // namespace ctlab
