#include "ctlab/fft.hpp"

#include <cmath>
#include <cstddef>

namespace ctlab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_radix2(std::vector<cplx>& a)
{
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const cplx wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Bluestein's algorithm: arbitrary-length DFT via a power-of-two convolution.
void fft_bluestein(std::vector<cplx>& a)
{
    const size_t n = a.size();
    size_t m = 1;
    while (m < 2 * n + 1)
        m <<= 1;

    // Chirp e^{-i*pi*k^2/n}; k^2 mod 2n keeps the argument bounded.
    std::vector<cplx> chirp(n);
    for (size_t k = 0; k < n; ++k) {
        const uint64_t k2 = (static_cast<uint64_t>(k) * k) % (2 * n);
        const double ang = -kPi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = cplx(std::cos(ang), std::sin(ang));
    }

    std::vector<cplx> u(m, cplx(0.0, 0.0)), v(m, cplx(0.0, 0.0));
    for (size_t k = 0; k < n; ++k)
        u[k] = a[k] * chirp[k];
    v[0] = std::conj(chirp[0]);
    for (size_t k = 1; k < n; ++k)
        v[k] = v[m - k] = std::conj(chirp[k]);

    fft_radix2(u);
    fft_radix2(v);
    for (size_t k = 0; k < m; ++k)
        u[k] *= v[k];
    // Inverse transform via conjugation.
    for (auto& x : u)
        x = std::conj(x);
    fft_radix2(u);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (size_t k = 0; k < n; ++k)
        a[k] = std::conj(u[k]) * inv_m * chirp[k];
}

}  // namespace

void fft(std::vector<cplx>& data)
{
    if (data.size() <= 1)
        return;
    if (is_power_of_two(data.size()))
        fft_radix2(data);
    else
        fft_bluestein(data);
}

std::vector<double> real_spectrum_magnitude(const std::vector<double>& x)
{
    std::vector<cplx> buf(x.size());
    for (size_t i = 0; i < x.size(); ++i)
        buf[i] = cplx(x[i], 0.0);
    fft(buf);
    std::vector<double> mag(x.size() / 2 + 1);
    for (size_t i = 0; i < mag.size(); ++i)
        mag[i] = std::abs(buf[i]);
    return mag;
}

}  // namespace ctlab
