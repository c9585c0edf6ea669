#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace fracfit::detail {

/// In-place iterative radix-2 FFT of a power-of-two length sequence.
/// Twiddles are tabulated per size and evaluated directly (no recurrence).
class Fft {
public:
    explicit Fft(std::size_t n);

    std::size_t size() const noexcept { return n_; }
    void forward(std::vector<std::complex<double>>& data) const { transform(data, false); }
    /// Unnormalized inverse; divide by size() afterwards.
    void inverse(std::vector<std::complex<double>>& data) const { transform(data, true); }

private:
    void transform(std::vector<std::complex<double>>& data, bool inverse) const;

    std::size_t n_;
    std::vector<std::size_t> bit_reverse_;
    std::vector<std::complex<double>> twiddles_;  // exp(-2 pi i k / n), k < n/2
};

}  // namespace fracfit::detail
