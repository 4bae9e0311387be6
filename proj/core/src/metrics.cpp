#include "neurokinect/metrics.hpp"

#include <cmath>
#include <vector>

#include "neurokinect/errors.hpp"

namespace nk {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "pearson inputs " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  const std::size_t n = x.size();
  if (n < 2) {
    throw Error(ErrorKind::LengthMismatch, "pearson needs at least 2 samples");
  }
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xbar += x[i];
    ybar += y[i];
  }
  xbar /= static_cast<double>(n);
  ybar /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - xbar;
    const double dy = y[i] - ybar;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0) throw Error(ErrorKind::ZeroVariance, "first input is constant");
  if (syy == 0.0) throw Error(ErrorKind::ZeroVariance, "second input is constant");
  return sxy / std::sqrt(sxx * syy);
}

double mse(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "mse inputs " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
  }
  if (x.empty()) {
    throw Error(ErrorKind::LengthMismatch, "mse needs at least 1 sample");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc / static_cast<double>(x.size());
}

MetricsReport combine_axis_metrics(double rx, double ry, double rz, double mx,
                                   double my, double mz, long n_samples) {
  MetricsReport r;
  r.rho_x = rx;
  r.rho_y = ry;
  r.rho_z = rz;
  r.mse_x = mx;
  r.mse_y = my;
  r.mse_z = mz;
  r.rho_3d = (rx + ry + rz) / 3.0;
  r.mse_3d = (mx + my + mz) / 3.0;
  r.n_samples = n_samples;
  return r;
}

MetricsReport metrics_3d(const Tensor& pred, const Tensor& target) {
  if (pred.shape.size() != 2 || pred.cols() != 3 || !same_shape(pred, target)) {
    throw Error(ErrorKind::ShapeMismatch,
                "metrics_3d wants S x 3 pairs, got " + pred.shape_str() + " vs " +
                    Tensor(target.shape).shape_str());
  }
  const int s = pred.rows();
  if (s < 2) {
    throw Error(ErrorKind::LengthMismatch, "metrics_3d needs at least 2 samples");
  }
  static const char* axis_names[] = {"x", "y", "z"};
  double rho[3], err[3];
  std::vector<double> a(static_cast<std::size_t>(s)), b(static_cast<std::size_t>(s));
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < s; ++r) {
      a[static_cast<std::size_t>(r)] = pred.at(r, c);
      b[static_cast<std::size_t>(r)] = target.at(r, c);
    }
    try {
      rho[c] = pearson(a, b);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ZeroVariance) {
        throw Error(ErrorKind::ZeroVariance,
                    std::string("axis ") + axis_names[c] + ": " + e.what());
      }
      throw;
    }
    err[c] = mse(a, b);
  }
  return combine_axis_metrics(rho[0], rho[1], rho[2], err[0], err[1], err[2], s);
}

}  // namespace nk
