#pragma once

#include <functional>
#include <span>
#include <vector>

#include "neurokinect/tensor.hpp"

namespace nk {

// Adam with the standard bias correction. Moments are laid out parallel to
// the parameter list handed to init().
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step_count = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  void init(std::span<Tensor* const> params);
};

// One update over all parameters. grads must be shape-parallel to params.
void adam_step(std::span<Tensor* const> params,
               std::span<const Tensor* const> grads, AdamState& state);

// Central-difference gradient verification: perturbs every coordinate of
// every parameter by +/-h, evaluates f, and returns the maximum of
// |analytic - central| / (|analytic| + |central| + 1e-12).
double finite_diff_check(const std::function<double()>& f,
                         std::span<Tensor* const> params,
                         std::span<const Tensor* const> analytic, double h);

}  // namespace nk
