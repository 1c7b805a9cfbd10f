#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ctlab/phy.hpp"
#include "ctlab/sample_stream.hpp"

namespace ctlab {

// Regulatory CFO bounds used when standards-compliance checking is on.
constexpr double kBleCfoLimitHz = 150e3;
constexpr double kIeee802154CfoLimitHz = 100e3;
constexpr double kDefaultCarrierHz = 2.44e9;

struct TransmitterProfile {
    double cfo_hz = 0.0;            // carrier frequency offset at temp_ref
    double amplitude = 1.0;         // linear, > 0 for active transmitters
    double timing_offset_s = 0.0;   // realized as whole-sample shifts
    double temperature_c = 25.0;
    double temp_ref_c = 25.0;
    double temp_slope_ppm_per_c = -0.2;  // crystal drift; <= 0 unless overridden
    double carrier_hz = kDefaultCarrierHz;
    // Fixed initial carrier phase; unset means per-packet random (seeded).
    std::optional<double> initial_phase_rad;
};

// CFO after applying the (linear) temperature model:
// cfo + slope_ppm * 1e-6 * carrier * (T - T_ref).
double cfo_at_temperature(const TransmitterProfile& profile);

struct ChannelScenario {
    std::vector<TransmitterProfile> transmitters;
    double snr_db = 25.0;       // relative to the strongest transmitter
    bool noise_enabled = true;
    bool enforce_cfo_limit = true;
    bool allow_positive_temp_slope = false;

    double strongest_power() const;
    double rfo_pair_hz(size_t i, size_t j) const;       // |cfo_i - cfo_j|, after temp model
    double delta_p_db(size_t i, size_t j) const;        // 10 log10(P_i / P_j)
    // Throws ConfigError / InvalidInputError on violated invariants.
    void validate(const PhyConfig& phy) const;
};

// Two-transmitter beating envelope (amplitude gain relative to the stronger
// transmitter): 1 - r + 2 r |cos(pi t rfo)|, r = A2/A1 in (0, 1].
// Analytical cross-check of superpose(); not part of the signal path.
double ct2_envelope(double t_s, double rfo_hz, double amp_ratio);

// Per-transmitter initial phases for one packet; profiles with a fixed phase
// keep it, others draw uniformly from [0, 2pi) using the given seed.
std::vector<double> draw_initial_phases(const ChannelScenario& scenario, uint64_t seed);

// Sum of amplitude-scaled, time-shifted, CFO-rotated streams. All streams
// must share a sample rate; shorter ones are zero-padded.
SampleStream superpose(const std::vector<SampleStream>& streams,
                       const ChannelScenario& scenario,
                       const std::vector<double>& initial_phases);

// Circularly-symmetric complex AWGN with total power
// strongest_power / 10^(snr_db/10) spread over the simulation bandwidth.
SampleStream add_awgn(const SampleStream& stream, double snr_db, double strongest_power,
                      uint64_t rng_seed);

}  // namespace ctlab
