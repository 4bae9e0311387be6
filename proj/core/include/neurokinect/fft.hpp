#pragma once

#include <complex>
#include <vector>

namespace nk {

// In-place iterative radix-2 FFT. Size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

// Linear convolution of signal with kernel (output length n + m - 1).
// Switches to FFT-based convolution when the direct product n*m is large.
std::vector<double> convolve(const std::vector<double>& signal,
                             const std::vector<double>& kernel);

}  // namespace nk
