#pragma once

#include <complex>
#include <vector>

namespace ctlab {

using cplx = std::complex<double>;

// In-place forward DFT, any length (radix-2 for powers of two, Bluestein
// otherwise). No scaling is applied.
void fft(std::vector<cplx>& data);

// Magnitude spectrum of a real sequence; returns bins 0..n/2 inclusive.
std::vector<double> real_spectrum_magnitude(const std::vector<double>& x);

}  // namespace ctlab
