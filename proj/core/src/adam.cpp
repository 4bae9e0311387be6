#include "neurokinect/adam.hpp"

#include <cmath>

#include "neurokinect/errors.hpp"

namespace nk {

void AdamState::init(std::span<Tensor* const> params) {
  first_moment.clear();
  second_moment.clear();
  step_count = 0;
  for (const Tensor* p : params) {
    first_moment.emplace_back(p->shape);
    second_moment.emplace_back(p->shape);
  }
}

void adam_step(std::span<Tensor* const> params,
               std::span<const Tensor* const> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw Error(ErrorKind::ShapeMismatch, "adam_step parameter/gradient count mismatch");
  }
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = *grads[k];
    Tensor& m = state.first_moment[k];
    Tensor& v = state.second_moment[k];
    if (!same_shape(p, g) || !same_shape(p, m)) {
      throw Error(ErrorKind::ShapeMismatch,
                  "adam_step param " + p.shape_str() + " vs grad " + g.shape_str());
    }
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * g.data[i];
      v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * g.data[i] * g.data[i];
      const double mhat = m.data[i] / bc1;
      const double vhat = v.data[i] / bc2;
      p.data[i] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

double finite_diff_check(const std::function<double()>& f,
                         std::span<Tensor* const> params,
                         std::span<const Tensor* const> analytic, double h) {
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& a = *analytic[k];
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      const double orig = p.data[i];
      p.data[i] = orig + h;
      const double fp = f();
      p.data[i] = orig - h;
      const double fm = f();
      p.data[i] = orig;
      const double central = (fp - fm) / (2.0 * h);
      const double err = std::abs(a.data[i] - central) /
                         (std::abs(a.data[i]) + std::abs(central) + 1e-12);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace nk
