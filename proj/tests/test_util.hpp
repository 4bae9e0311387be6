#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "neurokinect/rng.hpp"
#include "neurokinect/tensor.hpp"

namespace nktest {

inline nk::Tensor matrix(int rows, int cols, std::vector<double> vals) {
  return nk::Tensor({rows, cols}, std::move(vals));
}

inline nk::Tensor random_matrix(int rows, int cols, nk::Rng& rng, double scale = 1.0) {
  nk::Tensor t({rows, cols});
  for (auto& v : t.data) v = scale * rng.gaussian();
  return t;
}

inline double max_abs_diff(const nk::Tensor& a, const nk::Tensor& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
  }
  return worst;
}

// Steady-state amplitude of a sinusoid at normalized frequency f
// (cycles/sample) in x, measured by quadrature projection over [begin, end).
inline double tone_amplitude(const std::vector<double>& x, double f, std::size_t begin,
                             std::size_t end) {
  double re = 0.0, im = 0.0;
  const double w = 2.0 * 3.14159265358979323846 * f;
  for (std::size_t t = begin; t < end; ++t) {
    re += x[t] * std::cos(w * static_cast<double>(t));
    im += x[t] * std::sin(w * static_cast<double>(t));
  }
  const double n = static_cast<double>(end - begin);
  return 2.0 * std::sqrt(re * re + im * im) / n;
}

// Scratch directory unique per test binary run.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("nk_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace nktest
