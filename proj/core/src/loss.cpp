#include "neurokinect/loss.hpp"

#include <cmath>

#include "neurokinect/errors.hpp"

namespace nk {

namespace {

struct CenteredStats {
  double xbar, ybar;
  double sxx, syy, sxy;  // centered sums of squares / cross products
};

CenteredStats centered_stats(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
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
  return {xbar, ybar, sxx, syy, sxy};
}

void check_inputs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::LengthMismatch,
                "pred has " + std::to_string(x.size()) + " samples, target has " +
                    std::to_string(y.size()));
  }
  if (x.size() < 2) {
    throw Error(ErrorKind::LengthMismatch, "loss needs at least 2 samples");
  }
}

}  // namespace

LossValue loss_stat(std::span<const double> x, std::span<const double> y,
                    double eps_var) {
  check_inputs(x, y);
  const auto s = centered_stats(x, y);
  if (s.syy <= eps_var) {
    throw Error(ErrorKind::DegenerateTarget, "target is constant within eps_var");
  }
  const double n = static_cast<double>(x.size());

  const double denom = std::sqrt(std::max(s.sxx, eps_var) * s.syy);
  const double rho = s.sxy / denom;

  double sq_err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sq_err += d * d;
  }

  LossValue out;
  out.term1 = 1.0 - rho;
  out.term2 = 0.01 * sq_err / (std::sqrt(n) * std::sqrt(s.syy));
  out.term3 = 0.1 * std::abs(s.sxx - s.syy) / s.syy;
  out.total = out.term1 + out.term2 + out.term3;
  return out;
}

std::vector<double> loss_stat_grad(std::span<const double> x,
                                   std::span<const double> y, double eps_var) {
  check_inputs(x, y);
  const auto s = centered_stats(x, y);
  if (s.syy <= eps_var) {
    throw Error(ErrorKind::DegenerateTarget, "target is constant within eps_var");
  }
  const double n = static_cast<double>(x.size());

  const double sxx_f = std::max(s.sxx, eps_var);  // variance floor, see loss.hpp
  const double denom = std::sqrt(sxx_f * s.syy);
  const double rho = s.sxy / denom;

  // d term1/dx_i = -(d rho/dx_i)
  //   d rho/dx_i = (y_i - ybar)/denom - rho * (x_i - xbar)/sxx   (when sxx
  //   is above the floor; the floored branch freezes the denominator).
  const bool floored = s.sxx <= eps_var;
  const double c2 = 0.02 / (std::sqrt(n) * std::sqrt(s.syy));
  const double diff_var = s.sxx - s.syy;
  const double sgn = diff_var > 0.0 ? 1.0 : (diff_var < 0.0 ? -1.0 : 0.0);
  const double c3 = 0.2 * sgn / s.syy;

  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - s.xbar;
    const double dy = y[i] - s.ybar;
    double drho = dy / denom;
    if (!floored) drho -= rho * dx / s.sxx;
    g[i] = -drho + c2 * (x[i] - y[i]) + c3 * dx;
  }
  return g;
}

}  // namespace nk
