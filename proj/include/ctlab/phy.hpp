#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctlab/bits.hpp"
#include "ctlab/sample_stream.hpp"

namespace ctlab {

enum class PhyMode {
    BLE_2M,
    BLE_1M,
    BLE_500K,
    BLE_125K,
    IEEE_802_15_4,
};

enum class Coding {
    Uncoded,
    ConvR12,            // rate-1/2 convolutional, hard Viterbi
    ConvR12Manchester,  // ConvR12 plus 4-chip pattern mapper per coded bit
    Dsss32Chip,         // 16x32 chip table, 4-bit symbols
};

struct PhyConfig {
    PhyMode mode = PhyMode::BLE_1M;
    double symbol_rate_hz = 1e6;   // on-air element (bit or chip) rate
    double data_rate_bps = 1e6;    // effective payload rate
    int samples_per_symbol = 8;
    int preamble_bits = 8;         // uncoded on-air elements, alternating 1,0,...
    Coding coding = Coding::Uncoded;
    double fsk_deviation_hz = 250e3;  // tones sit at +/- this offset

    double sample_rate_hz() const { return symbol_rate_hz * samples_per_symbol; }
    bool validate(std::string* why = nullptr) const;
};

// Defaults for the five supported modes. Deviation is symbol_rate/4 for the
// BLE GFSK-like modes and symbol_rate/2 for the MSK-equivalent 802.15.4
// chip modulation.
PhyConfig phy_config(PhyMode mode, int samples_per_symbol = 8);

const char* phy_mode_name(PhyMode mode);
bool phy_mode_from_name(const std::string& name, PhyMode* out);

struct Packet {
    std::vector<uint8_t> payload;

    size_t payload_len() const { return payload.size(); }
};

// On-air frame = preamble elements ++ coded payload elements.
// Throws InvalidInputError for empty or oversized (>255 byte) payloads.
BitVec encode(const Packet& packet, const PhyConfig& phy);

// Coded payload length (on-air elements, preamble excluded) for a payload of
// `payload_bits` bits. Deterministic per mode.
size_t coded_length(size_t payload_bits, const PhyConfig& phy);

// Inverse of encode() on the coded region (preamble already stripped).
// Throws FramingError when the length is not a valid encoder output.
BitVec decode(const BitVec& coded, const PhyConfig& phy);

// Preamble pattern: alternating starting with 1.
BitVec preamble_pattern(const PhyConfig& phy);

// Binary FSK with continuous phase and unit amplitude; one element emits
// samples_per_symbol samples at +/- fsk_deviation_hz.
SampleStream modulate(const BitVec& elements, const PhyConfig& phy);

// T_packet = bits / data_rate.
double packet_airtime_s(size_t total_bits, const PhyConfig& phy);

}  // namespace ctlab
