#pragma once

#include <string>
#include <vector>

#include "ctlab/link.hpp"
#include "ctlab/receiver.hpp"

namespace ctlab {

struct BatchMetrics {
    size_t n_packets = 0;
    double prr = 0.0;  // received without errors
    double per = 0.0;  // received with errors
    double plr = 0.0;  // preamble lost
    double ber = 0.0;  // over received packets' payload bits
};

// PRR/PER/PLR accounting; prr + per + plr == 1 by construction.
BatchMetrics classify(const std::vector<ReceptionOutcome>& traces);
BatchMetrics classify(const BatchCounters& counters);

struct ErrorHistogram {
    std::vector<uint64_t> counts;  // per payload-bit position, received packets only
    uint64_t n_received = 0;
    double bit_rate_hz = 0.0;      // position -> time conversion (effective data rate)

    void merge(const ErrorHistogram& other);
};

// Builds the histogram from traces; only preamble-detected traces contribute
// and all of them must share the payload bit length.
ErrorHistogram accumulate(const std::vector<ReceptionOutcome>& traces, double bit_rate_hz);
ErrorHistogram histogram_from_counters(const BatchCounters& counters, double bit_rate_hz);

struct RfoPeak {
    double freq_hz = 0.0;
    double magnitude = 0.0;  // normalized to the strongest peak
};

struct RfoEstimate {
    std::vector<RfoPeak> peaks;  // sorted by magnitude, strongest first
    double resolution_hz = 0.0;  // bit_rate / histogram length
};

struct RfoEstimatorConfig {
    size_t min_bins = 64;
    uint64_t min_packets = 100;
    double prominence = 4.0;   // peak threshold, multiple of the median magnitude
    size_t merge_bins = 1;     // local maxima this close collapse into the stronger
    size_t dedup_bins = 2;     // reported peaks keep this much spacing
    double significance = 0.5; // fraction of the strongest peak kept as significant
    // The error waveform is pulse-like, so a harmonic can outgrow its
    // fundamental; a sufficiently strong peak at 1/2 or 1/3 of the top
    // frequency is promoted to the front of the peak list.
    double subharmonic_fraction = 0.35;
};

// Mean-subtract, Hann window, FFT magnitude, then prominence-gated local
// maxima. Throws InsufficientDataError below the configured floors.
RfoEstimate estimate_rfo(const ErrorHistogram& hist, const RfoEstimatorConfig& config = {});

// 1 + number of significant peaks; 0 peaks means "no beating detected" (1).
// Estimates above 3 transmitters are a lower bound, not an inversion of the
// pairwise-RFO combinatorics.
int count_transmitters(const RfoEstimate& est);

// CSV with header `bit_index,error_count`.
void write_histogram_csv(const std::string& path, const ErrorHistogram& hist);
// JSON object {resolution_hz, peaks:[{freq_hz, magnitude}]}.
void write_rfo_json(const std::string& path, const RfoEstimate& est);
std::string rfo_json_string(const RfoEstimate& est);

}  // namespace ctlab
