#include "ctlab/link.hpp"

#include <atomic>
#include <thread>

#include "ctlab/errors.hpp"
#include "ctlab/rng.hpp"

namespace ctlab {

PacketResult simulate_packet(const PhyConfig& phy, const ChannelScenario& scenario,
                             size_t payload_bytes, uint64_t seed, const LinkOptions& options)
{
    scenario.validate(phy);

    Rng payload_rng(derive_seed(seed, 0));
    Packet packet;
    packet.payload.resize(payload_bytes);
    for (auto& b : packet.payload)
        b = static_cast<uint8_t>(payload_rng.next_u64() & 0xffu);

    const BitVec frame = encode(packet, phy);
    const SampleStream tx_stream = modulate(frame, phy);
    const double fs = tx_stream.sample_rate_hz;

    // Frames start after a guard so that negative timing offsets and the
    // alignment search stay inside the buffer.
    ChannelScenario shifted = scenario;
    const double guard_s = static_cast<double>(options.guard_samples) / fs;
    for (auto& tx : shifted.transmitters)
        tx.timing_offset_s += guard_s;

    const std::vector<SampleStream> streams(scenario.transmitters.size(), tx_stream);
    const auto phases = draw_initial_phases(shifted, derive_seed(seed, 1));
    SampleStream rx = superpose(streams, shifted, phases);
    // Tail guard: the alignment search may settle a few samples late.
    rx.samples.resize(rx.samples.size() + static_cast<size_t>(options.guard_samples),
                      {0.0, 0.0});

    const double strongest = scenario.strongest_power();
    if (scenario.noise_enabled)
        rx = add_awgn(rx, scenario.snr_db, strongest, derive_seed(seed, 2));

    PacketResult result;
    const auto det = detect_preamble(rx, phy, strongest,
                                     static_cast<size_t>(options.guard_samples),
                                     options.detector);
    result.outcome.preamble_detected = det.detected;
    if (!det.detected)
        return result;

    const size_t sps = static_cast<size_t>(phy.samples_per_symbol);
    const size_t coded_start =
        static_cast<size_t>(det.alignment) + static_cast<size_t>(phy.preamble_bits) * sps;
    const size_t n_coded = coded_length(payload_bytes * 8, phy);
    if (rx.size() < coded_start + n_coded * sps)
        throw FramingError("received stream too short for the coded payload");

    const BitVec coded_rx = demodulate(rx, phy, coded_start, n_coded);
    if (options.collect_channel_bits) {
        result.channel_bits = n_coded;
        for (size_t i = 0; i < n_coded; ++i)
            result.channel_bit_errors +=
                (coded_rx[i] != frame[static_cast<size_t>(phy.preamble_bits) + i]);
    }

    result.outcome.rx_bits = decode(coded_rx, phy);
    const BitVec tx_bits = bytes_to_bits(packet.payload);
    for (size_t i = 0; i < tx_bits.size(); ++i)
        if (result.outcome.rx_bits[i] != tx_bits[i])
            result.outcome.error_positions.push_back(static_cast<uint32_t>(i));
    return result;
}

void BatchCounters::merge(const BatchCounters& other)
{
    n_packets += other.n_packets;
    received_ok += other.received_ok;
    received_errors += other.received_errors;
    lost += other.lost;
    payload_bit_errors += other.payload_bit_errors;
    payload_bits_received += other.payload_bits_received;
    channel_bit_errors += other.channel_bit_errors;
    channel_bits += other.channel_bits;
    if (error_histogram.size() < other.error_histogram.size())
        error_histogram.resize(other.error_histogram.size(), 0);
    for (size_t i = 0; i < other.error_histogram.size(); ++i)
        error_histogram[i] += other.error_histogram[i];
}

namespace {

void accumulate_packet(BatchCounters& acc, const PacketResult& r, size_t payload_bits)
{
    acc.n_packets++;
    if (!r.outcome.preamble_detected) {
        acc.lost++;
        return;
    }
    if (acc.error_histogram.size() < payload_bits)
        acc.error_histogram.resize(payload_bits, 0);
    if (r.outcome.error_positions.empty()) {
        acc.received_ok++;
    } else {
        acc.received_errors++;
        for (uint32_t pos : r.outcome.error_positions)
            acc.error_histogram[pos]++;
    }
    acc.payload_bit_errors += r.outcome.error_positions.size();
    acc.payload_bits_received += payload_bits;
    acc.channel_bit_errors += r.channel_bit_errors;
    acc.channel_bits += r.channel_bits;
}

}  // namespace

void parallel_for(size_t count, int n_threads, const std::function<void(size_t)>& fn)
{
    if (n_threads <= 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            fn(i);
        }
    };
    std::vector<std::thread> threads;
    const int n = std::min<int>(n_threads, static_cast<int>(count));
    threads.reserve(static_cast<size_t>(n));
    for (int t = 0; t < n; ++t)
        threads.emplace_back(worker);
    for (auto& t : threads)
        t.join();
}

BatchCounters run_batch(const PhyConfig& phy, const ChannelScenario& scenario,
                        size_t payload_bytes, size_t n_packets, uint64_t base_seed,
                        const LinkOptions& options, int n_threads)
{
    const size_t payload_bits = payload_bytes * 8;
    if (n_threads <= 1) {
        BatchCounters acc;
        for (size_t i = 0; i < n_packets; ++i)
            accumulate_packet(
                acc, simulate_packet(phy, scenario, payload_bytes, derive_seed(base_seed, i),
                                     options),
                payload_bits);
        return acc;
    }

    // Fixed chunking keeps per-packet seeds independent of the thread count.
    const size_t n_chunks = static_cast<size_t>(n_threads) * 4;
    const size_t chunk = (n_packets + n_chunks - 1) / n_chunks;
    std::vector<BatchCounters> partial(n_chunks);
    parallel_for(n_chunks, n_threads, [&](size_t c) {
        const size_t lo = c * chunk;
        const size_t hi = std::min(n_packets, lo + chunk);
        for (size_t i = lo; i < hi; ++i)
            accumulate_packet(
                partial[c],
                simulate_packet(phy, scenario, payload_bytes, derive_seed(base_seed, i), options),
                payload_bits);
    });
    BatchCounters acc;
    for (const auto& p : partial)
        acc.merge(p);
    return acc;
}

}  // namespace ctlab
