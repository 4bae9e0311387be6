#pragma once

#include <span>

#include "neurokinect/tensor.hpp"

namespace nk {

struct MetricsReport {
  double rho_x = 0.0, rho_y = 0.0, rho_z = 0.0, rho_3d = 0.0;
  double mse_x = 0.0, mse_y = 0.0, mse_z = 0.0, mse_3d = 0.0;
  long n_samples = 0;
};

// Pearson correlation coefficient. Throws ZeroVariance when either input is
// constant, LengthMismatch when sizes differ or n < 2.
double pearson(std::span<const double> x, std::span<const double> y);

// Mean squared error (1/n) * sum((x_i - y_i)^2).
double mse(std::span<const double> x, std::span<const double> y);

// Per-axis rho and MSE over S x 3 prediction/target matrices, plus the exact
// three-axis averages.
MetricsReport metrics_3d(const Tensor& pred, const Tensor& target);

// Aggregation used by metrics_3d, exposed so per-axis values from external
// sources can be combined with the same arithmetic.
MetricsReport combine_axis_metrics(double rx, double ry, double rz, double mx,
                                   double my, double mz, long n_samples);

}  // namespace nk
