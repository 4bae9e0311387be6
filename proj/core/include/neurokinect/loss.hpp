#pragma once

#include <span>
#include <vector>

namespace nk {

// Composite training loss over one predicted/target vector pair:
//   term1 = 1 - pearson(x, y)
//   term2 = 0.01 * sum((x_i - y_i)^2) / (sqrt(n) * sqrt(sum((y_i - ybar)^2)))
//   term3 = 0.1 * |sum((x_i - xbar)^2) - sum((y_i - ybar)^2)| / sum((y_i - ybar)^2)
// total = term1 + term2 + term3. The correlation term drives shape agreement,
// term2 penalizes pointwise error on the target's scale, and term3 matches
// variances so that a prediction cannot win on correlation alone while being
// systematically too flat or too wide.
struct LossValue {
  double total = 0.0;
  double term1 = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;

  LossValue& operator+=(const LossValue& o) {
    total += o.total;
    term1 += o.term1;
    term2 += o.term2;
    term3 += o.term3;
    return *this;
  }
};

// Throws DegenerateTarget when y is constant. A constant prediction is kept
// finite instead of erroring: the correlation denominator is floored at
// eps_var, which makes term1 = 1 (rho treated as 0) and leaves a usable
// gradient early in training.
LossValue loss_stat(std::span<const double> pred, std::span<const double> target,
                    double eps_var = 1e-12);

// Analytic gradient of loss_stat w.r.t. pred. The |.| in term3 uses the
// sign-at-zero subgradient (0 when the variances match exactly).
std::vector<double> loss_stat_grad(std::span<const double> pred,
                                   std::span<const double> target,
                                   double eps_var = 1e-12);

}  // namespace nk
