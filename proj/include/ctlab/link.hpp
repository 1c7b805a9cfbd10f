#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ctlab/channel.hpp"
#include "ctlab/phy.hpp"
#include "ctlab/receiver.hpp"

namespace ctlab {

struct LinkOptions {
    PreambleDetectorConfig detector;
    int guard_samples = 16;          // noise-only samples before the frame
    bool collect_channel_bits = false;  // also count pre-decoding element errors
};

struct PacketResult {
    ReceptionOutcome outcome;
    size_t channel_bit_errors = 0;  // raw element errors before decoding
    size_t channel_bits = 0;
};

// One packet end to end: encode, modulate per transmitter, superpose with
// beating, add noise, detect, demodulate, decode, compare. All randomness
// (payload, phases, noise) derives from `seed`.
PacketResult simulate_packet(const PhyConfig& phy, const ChannelScenario& scenario,
                             size_t payload_bytes, uint64_t seed,
                             const LinkOptions& options = {});

// Aggregated counters over a packet batch; merging is elementwise addition,
// so partial batches combine in any order.
struct BatchCounters {
    uint64_t n_packets = 0;
    uint64_t received_ok = 0;
    uint64_t received_errors = 0;
    uint64_t lost = 0;
    uint64_t payload_bit_errors = 0;   // over received packets
    uint64_t payload_bits_received = 0;
    uint64_t channel_bit_errors = 0;
    uint64_t channel_bits = 0;
    std::vector<uint64_t> error_histogram;  // payload-bit position counts (received only)

    void merge(const BatchCounters& other);
};

BatchCounters run_batch(const PhyConfig& phy, const ChannelScenario& scenario,
                        size_t payload_bytes, size_t n_packets, uint64_t base_seed,
                        const LinkOptions& options = {}, int n_threads = 1);

// Parallel-for helper shared by batch runners: calls fn(index) for every
// index in [0, count) from a small thread pool; result collection is the
// caller's business (use per-index slots or mergeable accumulators).
void parallel_for(size_t count, int n_threads, const std::function<void(size_t)>& fn);

}  // namespace ctlab
