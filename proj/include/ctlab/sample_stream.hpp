#pragma once

#include <complex>
#include <vector>

namespace ctlab {

// Complex baseband-equivalent sample stream.
struct SampleStream {
    std::vector<std::complex<double>> samples;
    double sample_rate_hz = 0.0;

    size_t size() const { return samples.size(); }
    double duration_s() const
    {
        return sample_rate_hz > 0.0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
    }
};

}  // namespace ctlab
