#include "ctlab/channel.hpp"

#include <cmath>

#include "ctlab/errors.hpp"
#include "ctlab/rng.hpp"

namespace ctlab {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

double cfo_at_temperature(const TransmitterProfile& profile)
{
    return profile.cfo_hz + profile.temp_slope_ppm_per_c * 1e-6 * profile.carrier_hz *
                                (profile.temperature_c - profile.temp_ref_c);
}

double ChannelScenario::strongest_power() const
{
    double p = 0.0;
    for (const auto& tx : transmitters)
        p = std::max(p, tx.amplitude * tx.amplitude);
    return p;
}

double ChannelScenario::rfo_pair_hz(size_t i, size_t j) const
{
    return std::abs(cfo_at_temperature(transmitters[i]) - cfo_at_temperature(transmitters[j]));
}

double ChannelScenario::delta_p_db(size_t i, size_t j) const
{
    const double pi_ = transmitters[i].amplitude * transmitters[i].amplitude;
    const double pj = transmitters[j].amplitude * transmitters[j].amplitude;
    return 10.0 * std::log10(pi_ / pj);
}

void ChannelScenario::validate(const PhyConfig& phy) const
{
    if (transmitters.empty() || transmitters.size() > 12)
        throw ConfigError("scenario needs 1..12 transmitters");
    const double limit =
        phy.mode == PhyMode::IEEE_802_15_4 ? kIeee802154CfoLimitHz : kBleCfoLimitHz;
    for (const auto& tx : transmitters) {
        if (!(tx.amplitude > 0.0))
            throw InvalidInputError("active transmitter amplitude must be positive");
        if (!allow_positive_temp_slope && tx.temp_slope_ppm_per_c > 0.0)
            throw InvalidInputError(
                "temp_slope must be <= 0 (set allow_positive_temp_slope to override)");
        if (enforce_cfo_limit && std::abs(cfo_at_temperature(tx)) > limit)
            throw InvalidInputError("transmitter CFO exceeds the standard limit");
    }
    if (noise_enabled && !std::isfinite(snr_db))
        throw ConfigError("snr_db must be finite when noise is enabled");
}

double ct2_envelope(double t_s, double rfo_hz, double amp_ratio)
{
    if (!(amp_ratio > 0.0) || amp_ratio > 1.0)
        throw InvalidInputError("amplitude ratio must lie in (0, 1]");
    if (!(rfo_hz > 0.0))
        throw InvalidInputError("rfo must be positive");
    return 1.0 - amp_ratio + 2.0 * amp_ratio * std::abs(std::cos(kPi * t_s * rfo_hz));
}

std::vector<double> draw_initial_phases(const ChannelScenario& scenario, uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> phases(scenario.transmitters.size());
    for (size_t i = 0; i < phases.size(); ++i) {
        const double random_phase = rng.uniform() * kTwoPi;
        phases[i] = scenario.transmitters[i].initial_phase_rad.value_or(random_phase);
    }
    return phases;
}

SampleStream superpose(const std::vector<SampleStream>& streams,
                       const ChannelScenario& scenario,
                       const std::vector<double>& initial_phases)
{
    if (streams.size() != scenario.transmitters.size() ||
        initial_phases.size() != streams.size())
        throw ConfigError("one stream and one phase per transmitter profile");
    const double fs = streams[0].sample_rate_hz;
    size_t n_out = 0;
    for (size_t i = 0; i < streams.size(); ++i) {
        if (streams[i].sample_rate_hz != fs)
            throw ConfigError("superpose requires a common sample rate");
        const long shift = std::lround(scenario.transmitters[i].timing_offset_s * fs);
        const long end = static_cast<long>(streams[i].size()) + std::max(0L, shift);
        n_out = std::max(n_out, static_cast<size_t>(std::max(0L, end)));
    }

    SampleStream out;
    out.sample_rate_hz = fs;
    out.samples.assign(n_out, {0.0, 0.0});

    for (size_t i = 0; i < streams.size(); ++i) {
        const auto& tx = scenario.transmitters[i];
        const auto& src = streams[i].samples;
        const long shift = std::lround(tx.timing_offset_s * fs);
        const double cfo = cfo_at_temperature(tx);

        // Incremental phasor for exp(j 2 pi cfo t); double precision drift is
        // far below the envelope tolerances at simulated durations.
        const double step = kTwoPi * cfo / fs;
        const std::complex<double> rot(std::cos(step), std::sin(step));

        const long first = std::max(0L, shift);
        const long last = std::min<long>(static_cast<long>(n_out),
                                         shift + static_cast<long>(src.size()));
        if (first >= last)
            continue;
        const double t0 = static_cast<double>(first) / fs;
        std::complex<double> phasor =
            std::polar(tx.amplitude, kTwoPi * cfo * t0 + initial_phases[i]);
        for (long n = first; n < last; ++n) {
            out.samples[static_cast<size_t>(n)] += phasor * src[static_cast<size_t>(n - shift)];
            phasor *= rot;
        }
    }
    return out;
}

SampleStream add_awgn(const SampleStream& stream, double snr_db, double strongest_power,
                      uint64_t rng_seed)
{
    SampleStream out = stream;
    const double noise_power = strongest_power / std::pow(10.0, snr_db / 10.0);
    const double sigma = std::sqrt(noise_power / 2.0);  // per quadrature
    Rng rng(rng_seed);
    for (auto& s : out.samples)
        s += std::complex<double>(sigma * rng.gaussian(), sigma * rng.gaussian());
    return out;
}

}  // namespace ctlab
