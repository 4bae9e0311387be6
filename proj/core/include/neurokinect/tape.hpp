#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "neurokinect/loss.hpp"
#include "neurokinect/rng.hpp"
#include "neurokinect/tensor.hpp"

namespace nk {

enum class Act { Relu, Elu, Selu, LeakyRelu, Sigmoid, Tanh };

inline constexpr double kEluAlpha = 1.0;
inline constexpr double kSeluLambda = 1.0507009873554804934;
inline constexpr double kSeluAlpha = 1.6732632423543772848;
inline constexpr double kLeakySlope = 0.01;

double apply_act(Act act, double x);

// Running statistics for one batch-norm layer. Owned by the model parameters
// (they travel with checkpoints); the tape only reads/updates them.
struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.9;  // new = momentum * old + (1 - momentum) * batch
  double epsilon = 1e-5;
};

// Reverse-mode differentiation over the fixed op set the model needs.
// Usage: build the forward computation through the op methods (each returns
// a value id), call backward(loss_id) once on a scalar, then read grad(id)
// for every parameter leaf. reset() recycles buffers between batches.
class Tape {
 public:
  using ValueId = int;

  Tape() = default;

  // Leaves. Both copy the tensor in; parameters are the ids whose gradients
  // the training loop reads back.
  ValueId leaf(Tensor v);

  ValueId matmul(ValueId a, ValueId b);
  // Elementwise add; b may also be a vector of size [cols] broadcast over
  // the rows of a (bias form).
  ValueId add(ValueId a, ValueId b);
  ValueId mul(ValueId a, ValueId b);
  ValueId activation(Act act, ValueId x);
  ValueId softmax_rows(ValueId x);
  ValueId concat_cols(const std::vector<ValueId>& xs);
  ValueId slice_cols(ValueId x, int c0, int c1);
  ValueId slice_rows(ValueId x, int r0, int r1);
  ValueId mean_all(ValueId x);
  ValueId batch_norm(ValueId x, ValueId gamma, ValueId beta,
                     BatchNormState* state, bool train);
  // Inverted dropout; in eval mode returns x unchanged.
  ValueId dropout(ValueId x, double rate, bool train, Rng* rng);
  // Scalar loss: sum over columns of the statistical loss between pred and
  // target (see loss.hpp). Reports the accumulated term values if asked.
  ValueId stat_loss(ValueId pred, const Tensor& target,
                    LossValue* report = nullptr, double eps_var = 1e-12);

  void backward(ValueId loss);

  const Tensor& value(ValueId id) const { return vals_[static_cast<std::size_t>(id)]; }
  // Gradient of the last backward() w.r.t. value `id` (zeros if untouched).
  const Tensor& grad(ValueId id);

  std::size_t size() const { return vals_.size(); }
  void reset();

 private:
  struct Node {
    std::function<void(Tape&)> backprop;  // empty for leaves
  };

  ValueId push(Tensor v, std::function<void(Tape&)> backprop);
  Tensor alloc(std::vector<int> shape);
  Tensor& grad_buf(ValueId id);
  void recycle(Tensor& t);

  std::vector<Tensor> vals_;
  std::vector<Tensor> grads_;
  std::vector<Node> nodes_;
  std::unordered_map<std::size_t, std::vector<std::vector<double>>> pool_;
};

}  // namespace nk
