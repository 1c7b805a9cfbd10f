#pragma once

#include <cstdint>
#include <vector>

#include "ctlab/bits.hpp"
#include "ctlab/phy.hpp"
#include "ctlab/sample_stream.hpp"

namespace ctlab {

struct ReceptionOutcome {
    bool preamble_detected = false;
    BitVec rx_bits;                       // decoded payload bits; empty if lost
    std::vector<uint32_t> error_positions;  // payload-bit indices

    bool received_ok() const { return preamble_detected && error_positions.empty(); }
    bool received_with_errors() const { return preamble_detected && !error_positions.empty(); }
};

// Non-coherent BFSK hard decisions: per element window, correlate against the
// two tone hypotheses and pick the larger magnitude. `offset_samples` selects
// the window alignment inside the stream.
BitVec demodulate(const SampleStream& stream, const PhyConfig& phy, size_t offset_samples = 0,
                  size_t max_elements = SIZE_MAX);

struct PreambleDetectorConfig {
    double power_fraction = 0.25;  // of the single-transmitter reference power
    int max_preamble_bit_errors = 1;
    int alignment_search = 4;      // +/- samples around the nominal start
};

struct PreambleDetection {
    bool detected = false;
    long alignment = 0;  // sample offset of the frame start
};

// Energy-plus-pattern preamble detection; non-detection is a loss, not an
// error. `reference_power` is the strongest transmitter's power and
// `nominal_start` the expected frame start sample around which the
// alignment search runs.
PreambleDetection detect_preamble(const SampleStream& stream, const PhyConfig& phy,
                                  double reference_power, size_t nominal_start = 0,
                                  const PreambleDetectorConfig& config = {});

// Analytical bit error rate for uncoded non-coherent BFSK under
// two-transmitter beating with equal received power and identical data:
// BER(x) = 1/2 exp(-x) I0(x), x = Eb/N0 (linear, per transmitter).
double analytical_ber_ct2(double ebn0_linear);

// Modified Bessel function of the first kind, order zero, relative error
// better than 1e-12 over the domain used here.
double bessel_i0(double x);

// exp(-x) * I0(x), stable for large x.
double bessel_i0_scaled(double x);

}  // namespace ctlab
