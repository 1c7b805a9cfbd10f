#include "ctlab/phy.hpp"

#include <cmath>

#include "ctlab/conv_code.hpp"
#include "ctlab/dsss.hpp"
#include "ctlab/errors.hpp"

namespace ctlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Manchester-style pattern mapper of the BLE 125K coded PHY:
// coded bit 0 -> 0011, 1 -> 1100.
constexpr uint8_t kPattern0[4] = {0, 0, 1, 1};
constexpr uint8_t kPattern1[4] = {1, 1, 0, 0};

BitVec manchester_map(const BitVec& coded)
{
    BitVec chips;
    chips.reserve(coded.size() * 4);
    for (uint8_t b : coded) {
        const uint8_t* p = b ? kPattern1 : kPattern0;
        chips.insert(chips.end(), p, p + 4);
    }
    return chips;
}

BitVec manchester_demap(const BitVec& chips)
{
    if (chips.size() % 4 != 0)
        throw FramingError("pattern-mapped stream length is not a multiple of 4");
    BitVec coded;
    coded.reserve(chips.size() / 4);
    for (size_t i = 0; i < chips.size(); i += 4) {
        int d0 = 0, d1 = 0;
        for (int k = 0; k < 4; ++k) {
            d0 += (chips[i + k] != kPattern0[k]);
            d1 += (chips[i + k] != kPattern1[k]);
        }
        coded.push_back(d1 < d0 ? 1 : 0);  // tie (d0 == d1) resolves to 0
    }
    return coded;
}

}  // namespace

bool PhyConfig::validate(std::string* why) const
{
    auto fail = [&](const char* msg) {
        if (why)
            *why = msg;
        return false;
    };
    if (symbol_rate_hz <= 0.0)
        return fail("symbol_rate must be positive");
    if (data_rate_bps <= 0.0)
        return fail("data_rate must be positive");
    if (samples_per_symbol < 2)
        return fail("samples_per_symbol must be at least 2");
    if (preamble_bits < 0)
        return fail("preamble_bits must be non-negative");
    if (fsk_deviation_hz <= 0.0 || fsk_deviation_hz >= sample_rate_hz() / 2.0)
        return fail("fsk_deviation must lie inside the simulated bandwidth");
    return true;
}

PhyConfig phy_config(PhyMode mode, int samples_per_symbol)
{
    PhyConfig c;
    c.mode = mode;
    c.samples_per_symbol = samples_per_symbol;
    switch (mode) {
    case PhyMode::BLE_2M:
        c.symbol_rate_hz = 2e6;
        c.data_rate_bps = 2e6;
        c.coding = Coding::Uncoded;
        c.preamble_bits = 16;
        c.fsk_deviation_hz = c.symbol_rate_hz / 4.0;
        break;
    case PhyMode::BLE_1M:
        c.symbol_rate_hz = 1e6;
        c.data_rate_bps = 1e6;
        c.coding = Coding::Uncoded;
        c.preamble_bits = 8;
        c.fsk_deviation_hz = c.symbol_rate_hz / 4.0;
        break;
    case PhyMode::BLE_500K:
        c.symbol_rate_hz = 1e6;
        c.data_rate_bps = 500e3;
        c.coding = Coding::ConvR12;
        c.preamble_bits = 8;
        c.fsk_deviation_hz = c.symbol_rate_hz / 4.0;
        break;
    case PhyMode::BLE_125K:
        c.symbol_rate_hz = 1e6;
        c.data_rate_bps = 125e3;
        c.coding = Coding::ConvR12Manchester;
        c.preamble_bits = 8;
        c.fsk_deviation_hz = c.symbol_rate_hz / 4.0;
        break;
    case PhyMode::IEEE_802_15_4:
        c.symbol_rate_hz = 2e6;  // chip rate
        c.data_rate_bps = 250e3;
        c.coding = Coding::Dsss32Chip;
        c.preamble_bits = 32;
        c.fsk_deviation_hz = c.symbol_rate_hz / 2.0;
        break;
    }
    return c;
}

const char* phy_mode_name(PhyMode mode)
{
    switch (mode) {
    case PhyMode::BLE_2M: return "BLE_2M";
    case PhyMode::BLE_1M: return "BLE_1M";
    case PhyMode::BLE_500K: return "BLE_500K";
    case PhyMode::BLE_125K: return "BLE_125K";
    case PhyMode::IEEE_802_15_4: return "IEEE_802_15_4";
    }
    return "?";
}

bool phy_mode_from_name(const std::string& name, PhyMode* out)
{
    for (PhyMode m : {PhyMode::BLE_2M, PhyMode::BLE_1M, PhyMode::BLE_500K, PhyMode::BLE_125K,
                      PhyMode::IEEE_802_15_4}) {
        if (name == phy_mode_name(m)) {
            *out = m;
            return true;
        }
    }
    return false;
}

BitVec preamble_pattern(const PhyConfig& phy)
{
    BitVec p(static_cast<size_t>(phy.preamble_bits));
    for (size_t i = 0; i < p.size(); ++i)
        p[i] = static_cast<uint8_t>((i + 1) % 2);
    return p;
}

size_t coded_length(size_t payload_bits, const PhyConfig& phy)
{
    switch (phy.coding) {
    case Coding::Uncoded:
        return payload_bits;
    case Coding::ConvR12:
        return 2 * (payload_bits + kConvTailBits);
    case Coding::ConvR12Manchester:
        return 8 * (payload_bits + kConvTailBits);
    case Coding::Dsss32Chip:
        return 8 * payload_bits;
    }
    return 0;
}

BitVec encode(const Packet& packet, const PhyConfig& phy)
{
    if (packet.payload.empty() || packet.payload.size() > 255)
        throw InvalidInputError("payload length must be 1..255 bytes");
    std::string why;
    if (!phy.validate(&why))
        throw InvalidInputError("invalid PHY config: " + why);

    const BitVec payload_bits = bytes_to_bits(packet.payload);
    BitVec coded;
    switch (phy.coding) {
    case Coding::Uncoded:
        coded = payload_bits;
        break;
    case Coding::ConvR12:
        coded = conv_encode(payload_bits);
        break;
    case Coding::ConvR12Manchester:
        coded = manchester_map(conv_encode(payload_bits));
        break;
    case Coding::Dsss32Chip:
        coded = dsss_spread(payload_bits);
        break;
    }

    BitVec frame = preamble_pattern(phy);
    frame.insert(frame.end(), coded.begin(), coded.end());
    return frame;
}

BitVec decode(const BitVec& coded, const PhyConfig& phy)
{
    switch (phy.coding) {
    case Coding::Uncoded:
        return coded;
    case Coding::ConvR12:
        return conv_decode(coded);
    case Coding::ConvR12Manchester:
        return conv_decode(manchester_demap(coded));
    case Coding::Dsss32Chip:
        return dsss_despread(coded);
    }
    throw InvalidInputError("unknown coding");
}

SampleStream modulate(const BitVec& elements, const PhyConfig& phy)
{
    if (elements.empty())
        throw InvalidInputError("cannot modulate an empty element sequence");
    std::string why;
    if (!phy.validate(&why))
        throw InvalidInputError("invalid PHY config: " + why);

    SampleStream out;
    out.sample_rate_hz = phy.sample_rate_hz();
    out.samples.resize(elements.size() * static_cast<size_t>(phy.samples_per_symbol));

    // Phase-continuous BFSK: integrate the per-sample phase increment.
    const double step = kTwoPi * phy.fsk_deviation_hz / out.sample_rate_hz;
    double phase = 0.0;
    size_t n = 0;
    for (uint8_t el : elements) {
        const double inc = el ? step : -step;
        for (int k = 0; k < phy.samples_per_symbol; ++k) {
            phase += inc;
            if (phase > kTwoPi)
                phase -= kTwoPi;
            else if (phase < -kTwoPi)
                phase += kTwoPi;
            out.samples[n++] = std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    return out;
}

double packet_airtime_s(size_t total_bits, const PhyConfig& phy)
{
    if (total_bits == 0)
        throw InvalidInputError("airtime of zero bits");
    return static_cast<double>(total_bits) / phy.data_rate_bps;
}

}  // namespace ctlab
