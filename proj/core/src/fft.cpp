#include "neurokinect/fft.hpp"

#include <cmath>
#include <cstddef>

namespace nk {

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n < 2) return;
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * 3.14159265358979323846 / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

namespace {

std::vector<double> convolve_direct(const std::vector<double>& s,
                                    const std::vector<double>& k) {
  std::vector<double> out(s.size() + k.size() - 1, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double si = s[i];
    for (std::size_t j = 0; j < k.size(); ++j) {
      out[i + j] += si * k[j];
    }
  }
  return out;
}

}  // namespace

std::vector<double> convolve(const std::vector<double>& signal,
                             const std::vector<double>& kernel) {
  if (signal.empty() || kernel.empty()) return {};
  const std::size_t out_len = signal.size() + kernel.size() - 1;
  if (signal.size() * kernel.size() < (1u << 16)) {
    return convolve_direct(signal, kernel);
  }
  std::size_t n = 1;
  while (n < out_len) n <<= 1;
  std::vector<std::complex<double>> fa(n), fb(n);
  for (std::size_t i = 0; i < signal.size(); ++i) fa[i] = signal[i];
  for (std::size_t i = 0; i < kernel.size(); ++i) fb[i] = kernel[i];
  fft_inplace(fa, false);
  fft_inplace(fb, false);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft_inplace(fa, true);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real();
  return out;
}

}  // namespace nk
