#include "ctlab/receiver.hpp"

#include <cmath>
#include <complex>

#include "ctlab/errors.hpp"

namespace ctlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Tone templates conj(exp(+/- j 2 pi f_dev n / fs)) for one element window.
struct ToneBank {
    std::vector<std::complex<double>> hi;
    std::vector<std::complex<double>> lo;

    ToneBank(const PhyConfig& phy)
    {
        const int n = phy.samples_per_symbol;
        hi.resize(n);
        lo.resize(n);
        const double step = kTwoPi * phy.fsk_deviation_hz / phy.sample_rate_hz();
        for (int k = 0; k < n; ++k) {
            const double ang = step * (k + 1);
            hi[k] = std::complex<double>(std::cos(ang), -std::sin(ang));
            lo[k] = std::conj(hi[k]);
        }
    }
};

}  // namespace

BitVec demodulate(const SampleStream& stream, const PhyConfig& phy, size_t offset_samples,
                  size_t max_elements)
{
    const size_t sps = static_cast<size_t>(phy.samples_per_symbol);
    if (stream.size() < offset_samples + sps)
        throw FramingError("stream shorter than one symbol");
    const size_t n_elements =
        std::min(max_elements, (stream.size() - offset_samples) / sps);

    const ToneBank bank(phy);
    BitVec bits(n_elements);
    const auto* s = stream.samples.data() + offset_samples;
    for (size_t i = 0; i < n_elements; ++i, s += sps) {
        std::complex<double> ch(0.0, 0.0), cl(0.0, 0.0);
        for (size_t k = 0; k < sps; ++k) {
            ch += s[k] * bank.hi[k];
            cl += s[k] * bank.lo[k];
        }
        bits[i] = std::norm(ch) >= std::norm(cl) ? 1 : 0;
    }
    return bits;
}

PreambleDetection detect_preamble(const SampleStream& stream, const PhyConfig& phy,
                                  double reference_power, size_t nominal_start,
                                  const PreambleDetectorConfig& config)
{
    PreambleDetection best;
    const size_t sps = static_cast<size_t>(phy.samples_per_symbol);
    const size_t window = static_cast<size_t>(phy.preamble_bits) * sps;
    if (window == 0 || stream.size() < window)
        return best;

    const BitVec pattern = preamble_pattern(phy);
    const ToneBank bank(phy);
    double best_confidence = -1.0;

    for (long rel = -config.alignment_search; rel <= config.alignment_search; ++rel) {
        const long off = static_cast<long>(nominal_start) + rel;
        if (off < 0 || static_cast<size_t>(off) + window > stream.size())
            continue;
        // Mean envelope power across the preamble window.
        double power = 0.0;
        for (size_t k = 0; k < window; ++k)
            power += std::norm(stream.samples[static_cast<size_t>(off) + k]);
        power /= static_cast<double>(window);
        if (power < config.power_fraction * reference_power)
            continue;

        // Demodulate the preamble; the tone-separation margin peaks sharply
        // at the true alignment and arbitrates between candidate offsets.
        int errors = 0;
        double confidence = 0.0;
        const auto* s = stream.samples.data() + off;
        for (size_t i = 0; i < pattern.size(); ++i, s += sps) {
            std::complex<double> ch(0.0, 0.0), cl(0.0, 0.0);
            for (size_t k = 0; k < sps; ++k) {
                ch += s[k] * bank.hi[k];
                cl += s[k] * bank.lo[k];
            }
            const double eh = std::norm(ch), el = std::norm(cl);
            errors += ((eh >= el ? 1 : 0) != pattern[i]);
            confidence += std::abs(eh - el);
        }
        if (errors <= config.max_preamble_bit_errors && confidence > best_confidence) {
            best_confidence = confidence;
            best.detected = true;
            best.alignment = off;
        }
    }
    return best;
}

double bessel_i0(double x)
{
    x = std::abs(x);  // I0 is even
    if (x < 30.0) {
        // Power series: all terms positive, no cancellation.
        const double q = x * x / 4.0;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < sum * 1e-17)
                break;
        }
        return sum;
    }
    return bessel_i0_scaled(x) * std::exp(x);
}

double bessel_i0_scaled(double x)
{
    x = std::abs(x);
    if (x < 30.0)
        return bessel_i0(x) * std::exp(-x);
    // Asymptotic expansion of e^-x I0(x) = (2 pi x)^{-1/2} sum a_k / x^k,
    // a_k = prod((2j-1)^2) / (8^k k!). Truncated where terms stop shrinking.
    const double inv8x = 1.0 / (8.0 * x);
    double term = 1.0, sum = 1.0;
    double prev = 1.0;
    for (int k = 1; k < 30; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= odd * odd * inv8x / static_cast<double>(k);
        if (term > prev)
            break;
        sum += term;
        prev = term;
        if (term < sum * 1e-17)
            break;
    }
    return sum / std::sqrt(kTwoPi * x);
}

double analytical_ber_ct2(double ebn0_linear)
{
    if (ebn0_linear < 0.0)
        throw InvalidInputError("Eb/N0 must be non-negative");
    return 0.5 * bessel_i0_scaled(ebn0_linear);
}

}  // namespace ctlab
