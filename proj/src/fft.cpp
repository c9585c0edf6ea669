#include "fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace fracfit::detail {

Fft::Fft(std::size_t n) : n_(n) {
    if (n == 0 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("Fft: size must be a power of two");
    }
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) {
        ++bits;
    }
    bit_reverse_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < bits; ++b) {
            r |= ((i >> b) & 1U) << (bits - 1 - b);
        }
        bit_reverse_[i] = r;
    }
    twiddles_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        twiddles_[k] = {std::cos(angle), std::sin(angle)};
    }
}

void Fft::transform(std::vector<std::complex<double>>& data, bool inverse) const {
    if (data.size() != n_) {
        throw std::invalid_argument("Fft: data size mismatch");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t r = bit_reverse_[i];
        if (i < r) {
            std::swap(data[i], data[r]);
        }
    }
    auto* d = reinterpret_cast<double*>(data.data());
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const std::complex<double> w = twiddles_[k * stride];
                const double wr = w.real();
                const double wi = inverse ? -w.imag() : w.imag();
                double* a = d + 2 * (start + k);
                double* b = d + 2 * (start + k + half);
                // Written out to avoid the NaN-recovery path of complex operator*.
                const double tr = b[0] * wr - b[1] * wi;
                const double ti = b[0] * wi + b[1] * wr;
                b[0] = a[0] - tr;
                b[1] = a[1] - ti;
                a[0] += tr;
                a[1] += ti;
            }
        }
    }
}

}  // namespace fracfit::detail
