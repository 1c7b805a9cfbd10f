#include "ctlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ctlab/errors.hpp"
#include "ctlab/fft.hpp"

namespace ctlab {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

BatchMetrics classify(const std::vector<ReceptionOutcome>& traces)
{
    if (traces.empty())
        throw InvalidInputError("cannot classify an empty batch");
    BatchCounters c;
    for (const auto& t : traces) {
        c.n_packets++;
        if (!t.preamble_detected) {
            c.lost++;
            continue;
        }
        if (t.error_positions.empty())
            c.received_ok++;
        else
            c.received_errors++;
        c.payload_bit_errors += t.error_positions.size();
        c.payload_bits_received += t.rx_bits.size();
    }
    return classify(c);
}

BatchMetrics classify(const BatchCounters& counters)
{
    if (counters.n_packets == 0)
        throw InvalidInputError("cannot classify an empty batch");
    BatchMetrics m;
    m.n_packets = counters.n_packets;
    const double total = static_cast<double>(counters.n_packets);
    m.prr = static_cast<double>(counters.received_ok) / total;
    m.per = static_cast<double>(counters.received_errors) / total;
    m.plr = static_cast<double>(counters.lost) / total;
    m.ber = counters.payload_bits_received
                ? static_cast<double>(counters.payload_bit_errors) /
                      static_cast<double>(counters.payload_bits_received)
                : 0.0;
    return m;
}

void ErrorHistogram::merge(const ErrorHistogram& other)
{
    if (counts.empty()) {
        *this = other;
        return;
    }
    if (other.counts.empty())
        return;
    if (other.counts.size() != counts.size() || other.bit_rate_hz != bit_rate_hz)
        throw InvalidInputError("histograms with different shapes cannot merge");
    for (size_t i = 0; i < counts.size(); ++i)
        counts[i] += other.counts[i];
    n_received += other.n_received;
}

ErrorHistogram accumulate(const std::vector<ReceptionOutcome>& traces, double bit_rate_hz)
{
    ErrorHistogram hist;
    hist.bit_rate_hz = bit_rate_hz;
    for (const auto& t : traces) {
        if (!t.preamble_detected)
            continue;
        if (hist.counts.empty())
            hist.counts.assign(t.rx_bits.size(), 0);
        else if (hist.counts.size() != t.rx_bits.size())
            throw InvalidInputError("traces in one histogram must share payload length");
        hist.n_received++;
        for (uint32_t pos : t.error_positions)
            hist.counts[pos]++;
    }
    return hist;
}

ErrorHistogram histogram_from_counters(const BatchCounters& counters, double bit_rate_hz)
{
    ErrorHistogram hist;
    hist.bit_rate_hz = bit_rate_hz;
    hist.counts = counters.error_histogram;
    hist.n_received = counters.received_ok + counters.received_errors;
    return hist;
}

RfoEstimate estimate_rfo(const ErrorHistogram& hist, const RfoEstimatorConfig& config)
{
    const size_t n = hist.counts.size();
    if (n < config.min_bins)
        throw InsufficientDataError("histogram too short for frequency estimation");
    if (hist.n_received < config.min_packets)
        throw InsufficientDataError("too few contributing packets for frequency estimation");

    double mean = 0.0;
    for (uint64_t c : hist.counts)
        mean += static_cast<double>(c);
    mean /= static_cast<double>(n);

    std::vector<double> x(n);
    for (size_t i = 0; i < n; ++i) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                                 static_cast<double>(n - 1));
        x[i] = (static_cast<double>(hist.counts[i]) - mean) * hann;
    }

    const std::vector<double> mag = real_spectrum_magnitude(x);

    RfoEstimate est;
    est.resolution_hz = hist.bit_rate_hz / static_cast<double>(n);

    // Median over the positive-frequency bins sets the noise floor.
    std::vector<double> sorted(mag.begin() + 1, mag.end());
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted.empty() ? 0.0 : sorted[sorted.size() / 2];
    const double threshold = config.prominence * median;

    std::vector<size_t> maxima;
    for (size_t k = 1; k + 1 < mag.size(); ++k) {
        const double left = (k == 1) ? 0.0 : mag[k - 1];  // DC excluded from comparisons
        if (mag[k] <= threshold || mag[k] < left || mag[k] < mag[k + 1])
            continue;
        maxima.push_back(k);
    }

    // Collapse clusters of nearby maxima (window skirts, unresolved
    // neighbours) into their strongest member.
    std::sort(maxima.begin(), maxima.end(),
              [&](size_t a, size_t b) { return mag[a] > mag[b]; });
    std::vector<size_t> kept;
    for (size_t k : maxima) {
        bool swallowed = false;
        for (size_t other : kept)
            if ((k > other ? k - other : other - k) <= config.merge_bins) {
                swallowed = true;
                break;
            }
        if (!swallowed)
            kept.push_back(k);
    }

    const double strongest = kept.empty() ? 0.0 : mag[kept.front()];
    const double keep_floor = std::min(config.significance, config.subharmonic_fraction);
    for (size_t k : kept) {
        if (mag[k] < keep_floor * strongest)
            continue;
        est.peaks.push_back({static_cast<double>(k) * est.resolution_hz, mag[k] / strongest});
    }
    std::sort(est.peaks.begin(), est.peaks.end(),
              [](const RfoPeak& a, const RfoPeak& b) { return a.magnitude > b.magnitude; });

    // Subharmonic promotion: the error waveform is pulse-like, so a harmonic
    // can outgrow its fundamental. A strong-enough companion at half or a
    // third of the top frequency is the beat fundamental and becomes the
    // reported estimate.
    if (est.peaks.size() > 1) {
        for (int divisor : {2, 3}) {
            const double target = est.peaks[0].freq_hz / divisor;
            bool promoted = false;
            for (size_t i = 1; i < est.peaks.size(); ++i) {
                if (std::abs(est.peaks[i].freq_hz - target) <= est.resolution_hz &&
                    est.peaks[i].magnitude >= config.subharmonic_fraction) {
                    std::rotate(est.peaks.begin(), est.peaks.begin() + i,
                                est.peaks.begin() + i + 1);
                    promoted = true;
                    break;
                }
            }
            if (promoted)
                break;
        }
    }

    // Final significance gate; the promoted fundamental always stays.
    est.peaks.erase(std::remove_if(est.peaks.begin() + (est.peaks.empty() ? 0 : 1),
                                   est.peaks.end(),
                                   [&](const RfoPeak& p) {
                                       return p.magnitude < config.significance;
                                   }),
                    est.peaks.end());

    // Reported peaks keep a minimum spacing: an unresolved neighbour of an
    // already-reported line is its skirt, not a separate beat.
    std::vector<RfoPeak> spaced;
    for (const auto& p : est.peaks) {
        bool near = false;
        for (const auto& kept_peak : spaced)
            if (std::abs(kept_peak.freq_hz - p.freq_hz) <=
                static_cast<double>(config.dedup_bins) * est.resolution_hz) {
                near = true;
                break;
            }
        if (!near)
            spaced.push_back(p);
    }
    est.peaks = std::move(spaced);
    return est;
}

int count_transmitters(const RfoEstimate& est)
{
    if (est.peaks.empty())
        return 1;
    // k transmitters produce up to k(k-1)/2 pairwise beat lines; cap the
    // count by that relation instead of trusting every peak.
    const size_t p = est.peaks.size();
    int k = 2;
    while (static_cast<size_t>(k * (k - 1) / 2) < p)
        ++k;
    return k;
}

void write_histogram_csv(const std::string& path, const ErrorHistogram& hist)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open " + path + " for writing");
    out << "bit_index,error_count\n";
    for (size_t i = 0; i < hist.counts.size(); ++i)
        out << i << "," << hist.counts[i] << "\n";
}

std::string rfo_json_string(const RfoEstimate& est)
{
    char buf[96];
    std::string s = "{\n";
    std::snprintf(buf, sizeof(buf), "  \"resolution_hz\": %.6g,\n", est.resolution_hz);
    s += buf;
    s += "  \"peaks\": [";
    for (size_t i = 0; i < est.peaks.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%s\n    {\"freq_hz\": %.6g, \"magnitude\": %.6g}",
                      i ? "," : "", est.peaks[i].freq_hz, est.peaks[i].magnitude);
        s += buf;
    }
    s += est.peaks.empty() ? "]\n}\n" : "\n  ]\n}\n";
    return s;
}

void write_rfo_json(const std::string& path, const RfoEstimate& est)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open " + path + " for writing");
    out << rfo_json_string(est);
}

}  // namespace ctlab
