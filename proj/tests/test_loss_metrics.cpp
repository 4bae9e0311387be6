#include <doctest.h>

#include <cmath>
#include <vector>

#include "neurokinect/errors.hpp"
#include "neurokinect/loss.hpp"
#include "neurokinect/metrics.hpp"
#include "neurokinect/rng.hpp"
#include "test_util.hpp"

using namespace nk;

namespace {

// Independent scalar evaluation of the composite loss, written straight from
// its definition (no shared code with loss_stat).
LossValue loss_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double xb = 0, yb = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xb += x[i];
    yb += y[i];
  }
  xb /= n;
  yb /= n;
  double sxx = 0, syy = 0, sxy = 0, se = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xb) * (x[i] - xb);
    syy += (y[i] - yb) * (y[i] - yb);
    sxy += (x[i] - xb) * (y[i] - yb);
    se += (x[i] - y[i]) * (x[i] - y[i]);
  }
  LossValue v;
  v.term1 = 1.0 - sxy / std::sqrt(sxx * syy);
  v.term2 = 0.01 * se / (std::sqrt(n) * std::sqrt(syy));
  v.term3 = 0.1 * std::abs(sxx - syy) / syy;
  v.total = v.term1 + v.term2 + v.term3;
  return v;
}

}  // namespace

TEST_CASE("loss matches the scalar oracle on the worked example") {
  const std::vector<double> x{0, 1, 2}, y{0, 2, 4};
  const LossValue got = loss_stat(x, y);
  const LossValue want = loss_oracle(x, y);
  CHECK(got.term1 == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(got.term2 - 0.010206207261596574) < 1e-12);
  CHECK(std::abs(got.term3 - 0.075) < 1e-12);
  CHECK(std::abs(got.total - 0.08520620726159658) < 1e-12);
  CHECK(std::abs(got.total - want.total) < 1e-15);
  CHECK(std::abs(got.total - (got.term1 + got.term2 + got.term3)) < 1e-12);
}

TEST_CASE("loss vanishes when prediction equals a non-constant target") {
  Rng rng(11);
  for (int it = 0; it < 200; ++it) {
    std::vector<double> x(100);
    for (auto& v : x) v = rng.gaussian();
    const LossValue v = loss_stat(x, x);
    CHECK(std::abs(v.total) < 1e-12);
  }
}

TEST_CASE("near-zero loss forces pointwise agreement") {
  // Constructive converse: minimize nothing, just check that random pairs
  // with total < 1e-12 only arise from x == y.
  Rng rng(5);
  std::vector<double> x(64), y(64);
  for (auto& v : y) v = rng.gaussian();
  x = y;
  for (auto& v : x) v += 1e-9 * rng.gaussian();
  const LossValue v = loss_stat(x, y);
  if (v.total < 1e-12) {
    double worst = 0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("doubling the target amplitude costs exactly 0.3 in the variance term") {
  Rng rng(7);
  std::vector<double> y(50), x(50);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = rng.gaussian();
    x[i] = 2.0 * y[i];
  }
  const LossValue v = loss_stat(x, y);
  CHECK(std::abs(v.term1) < 1e-12);            // perfectly correlated
  CHECK(v.term2 > 0.0);                        // but pointwise wrong
  CHECK(std::abs(v.term3 - 0.3) < 1e-12);      // |4*syy - syy| / syy * 0.1
}

TEST_CASE("constant target raises DegenerateTarget") {
  const std::vector<double> x{0, 1, 2}, y{5, 5, 5};
  CHECK_THROWS_AS((void)loss_stat(x, y), Error);
  try {
    (void)loss_stat(x, y);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateTarget);
  }
}

TEST_CASE("constant prediction stays finite with rho treated as zero") {
  const std::vector<double> x{1, 1, 1, 1}, y{0, 1, 2, 3};
  const LossValue v = loss_stat(x, y);
  CHECK(std::isfinite(v.total));
  CHECK(v.term1 == doctest::Approx(1.0));  // rho -> 0
  const auto g = loss_stat_grad(x, y);
  for (double gv : g) CHECK(std::isfinite(gv));
}

TEST_CASE("loss gradient matches the hand-derived n=2 closed form") {
  // d/dx of the loss at x=[0,1], y=[0,2] is exactly [1/20, -3/50] and the
  // loss itself is exactly 0.08 (symbolic differentiation oracle).
  const std::vector<double> x{0, 1}, y{0, 2};
  const LossValue v = loss_stat(x, y);
  CHECK(std::abs(v.total - 0.08) < 1e-15);
  const auto g = loss_stat_grad(x, y);
  CHECK(std::abs(g[0] - 0.05) < 1e-14);
  CHECK(std::abs(g[1] - (-0.06)) < 1e-14);
}

TEST_CASE("loss gradient matches central differences on random pairs") {
  Rng rng(23);
  double worst = 0.0;
  for (int it = 0; it < 100; ++it) {
    std::vector<double> x(50), y(50);
    for (auto& v : x) v = rng.gaussian();
    for (auto& v : y) v = rng.gaussian();
    const auto g = loss_stat_grad(x, y);
    const double h = 1e-5;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double orig = x[i];
      x[i] = orig + h;
      const double fp = loss_stat(x, y).total;
      x[i] = orig - h;
      const double fm = loss_stat(x, y).total;
      x[i] = orig;
      const double central = (fp - fm) / (2 * h);
      worst = std::max(worst, std::abs(g[i] - central) /
                                  (std::abs(g[i]) + std::abs(central) + 1e-12));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("gradient at x == y has zero error term and matches finite differences") {
  Rng rng(31);
  std::vector<double> y(40);
  for (auto& v : y) v = rng.gaussian();
  std::vector<double> x = y;
  const auto g = loss_stat_grad(x, y);
  // term2's gradient is 0.02*(x-y)/... == 0 here; check against central
  // differences with an absolute tolerance (the variance term sits at its
  // |.| kink, so relative error is meaningless at an exact zero).
  const double h = 1e-5;
  for (std::size_t i = 0; i < x.size(); i += 7) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = loss_stat(x, y).total;
    x[i] = orig - h;
    const double fm = loss_stat(x, y).total;
    x[i] = orig;
    CHECK(std::abs(g[i] - (fp - fm) / (2 * h)) < 1e-4);
  }
}

TEST_CASE("pearson basics") {
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}) ==
        doctest::Approx(1.0));
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) ==
        doctest::Approx(-1.0));
  CHECK(std::abs(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}) -
                 0.8) < 1e-12);
  CHECK_THROWS_AS((void)pearson(std::vector<double>{1, 1}, std::vector<double>{1, 2}), Error);
}

TEST_CASE("pearson is invariant to positive affine maps") {
  Rng rng(3);
  std::vector<double> x(64), y(64), x2(64);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.gaussian();
    y[i] = rng.gaussian();
  }
  const double a = 2.5, b = -7.0;
  for (std::size_t i = 0; i < x.size(); ++i) x2[i] = a * x[i] + b;
  CHECK(std::abs(pearson(x, y) - pearson(x2, y)) < 1e-12);
}

TEST_CASE("rho stays within [-1, 1] on random data") {
  Rng rng(17);
  for (int it = 0; it < 200; ++it) {
    std::vector<double> x(20), y(20);
    for (auto& v : x) v = rng.gaussian();
    for (auto& v : y) v = rng.gaussian();
    const double r = pearson(x, y);
    CHECK(r <= 1.0 + 1e-12);
    CHECK(r >= -1.0 - 1e-12);
  }
}

TEST_CASE("mse basics") {
  CHECK(mse(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == 0.0);
  CHECK(mse(std::vector<double>{0, 0}, std::vector<double>{1, 1}) == doctest::Approx(1.0));
  CHECK(std::abs(mse(std::vector<double>{0, 1, 2}, std::vector<double>{0, 2, 4}) - 5.0 / 3.0) <
        1e-15);
  CHECK_THROWS_AS((void)mse(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}

TEST_CASE("three-axis aggregation reproduces the published per-subject arithmetic") {
  // First row and the column averages of the reference results table.
  const MetricsReport p1 =
      combine_axis_metrics(0.95, 0.95, 0.87, 0.006, 0.006, 0.012, 100);
  CHECK(std::abs(p1.rho_3d - 0.923) < 5e-4);
  CHECK(p1.mse_3d == doctest::Approx(0.008).epsilon(1e-12));

  const double rx[] = {0.95, 0.88, 0.90, 0.92, 0.93, 0.92, 0.95, 0.90};
  const double ry[] = {0.95, 0.88, 0.91, 0.93, 0.93, 0.92, 0.96, 0.93};
  const double rz[] = {0.87, 0.84, 0.84, 0.71, 0.83, 0.83, 0.90, 0.79};
  const double mx[] = {0.006, 0.020, 0.015, 0.020, 0.022, 0.017, 0.019, 0.013};
  const double my[] = {0.006, 0.020, 0.017, 0.021, 0.017, 0.012, 0.018, 0.011};
  const double mz[] = {0.012, 0.019, 0.025, 0.023, 0.015, 0.016, 0.014, 0.018};
  double arx = 0, ary = 0, arz = 0, amx = 0, amy = 0, amz = 0;
  for (int i = 0; i < 8; ++i) {
    arx += rx[i] / 8;
    ary += ry[i] / 8;
    arz += rz[i] / 8;
    amx += mx[i] / 8;
    amy += my[i] / 8;
    amz += mz[i] / 8;
  }
  CHECK(std::abs(arx - 0.92) < 5e-3);
  CHECK(std::abs(ary - 0.93) < 5e-3);
  CHECK(std::abs(arz - 0.83) < 5e-3);
  CHECK(std::abs(amx - 0.016) < 5e-3);
  CHECK(std::abs(amy - 0.015) < 5e-3);
  CHECK(std::abs(amz - 0.017) < 5e-3);
}

TEST_CASE("metrics_3d equals axis-wise pearson and mse") {
  Rng rng(42);
  const int s = 80;
  nk::Tensor pred = nktest::random_matrix(s, 3, rng);
  nk::Tensor target = nktest::random_matrix(s, 3, rng);
  const MetricsReport m = metrics_3d(pred, target);
  std::vector<double> a(s), b(s);
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < s; ++r) {
      a[static_cast<std::size_t>(r)] = pred.at(r, c);
      b[static_cast<std::size_t>(r)] = target.at(r, c);
    }
    const double rho = pearson(a, b);
    const double err = mse(a, b);
    const double got_rho = c == 0 ? m.rho_x : (c == 1 ? m.rho_y : m.rho_z);
    const double got_mse = c == 0 ? m.mse_x : (c == 1 ? m.mse_y : m.mse_z);
    CHECK(std::abs(got_rho - rho) < 1e-15);
    CHECK(std::abs(got_mse - err) < 1e-15);
  }
  CHECK(std::abs(m.rho_3d - (m.rho_x + m.rho_y + m.rho_z) / 3.0) < 1e-15);
  CHECK(std::abs(m.mse_3d - (m.mse_x + m.mse_y + m.mse_z) / 3.0) < 1e-15);
}

TEST_CASE("metrics_3d on identical pairs and constant predictor") {
  Rng rng(9);
  nk::Tensor target = nktest::random_matrix(40, 3, rng);
  const MetricsReport m = metrics_3d(target, target);
  CHECK(m.rho_3d == doctest::Approx(1.0));
  CHECK(m.mse_3d == 0.0);

  nk::Tensor flat({40, 3});
  CHECK_THROWS_AS((void)metrics_3d(flat, target), Error);
}
