#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "neurokinect/tape.hpp"
#include "neurokinect/tensor.hpp"

namespace nk {

std::string to_string(Act act);
Act act_from_string(const std::string& name);

struct ConvBranch {
  int width = 32;
  Act activation = Act::Relu;
};

enum class OutputActivation { Linear, Sigmoid };

// Architecture: per time step, parallel width-preserving pointwise (kernel-1)
// branches with mixed activations, concatenated and softmax-normalized over
// features; the step sequence feeds a bidirectional LSTM whose combined final
// states pass through another softmax and a dense stack (affine -> batch
// norm -> activation -> dropout) down to the 3-D position head.
struct ModelConfig {
  int n_channels = 32;
  int window_steps = 11;  // lags + 1
  std::vector<ConvBranch> conv_branches = {{32, Act::Relu},
                                           {32, Act::Elu},
                                           {32, Act::Selu},
                                           {32, Act::LeakyRelu}};
  int lstm_hidden = 64;  // per direction
  std::vector<int> dense_widths = {128, 64};
  Act dense_activation = Act::Relu;
  double dropout_rate = 0.2;
  int output_dim = 3;
  OutputActivation output_activation = OutputActivation::Linear;
  std::uint64_t seed = 0;

  int conv_features() const {
    int f = 0;
    for (const auto& b : conv_branches) f += b.width;
    return f;
  }
};

struct DenseLayer {
  Tensor weight, bias;
  Tensor gamma, beta;
  BatchNormState bn;
};

// One direction of the recurrent layer. Gate order in the fused projection:
// input, forget, candidate, output.
struct LstmDirection {
  Tensor wx;  // in x 4H
  Tensor wh;  // H x 4H
  Tensor bias;  // 4H
};

struct ModelParams {
  ModelConfig config;
  std::vector<std::pair<Tensor, Tensor>> conv;  // per branch: {N x width, width}
  LstmDirection forward_dir, backward_dir;
  std::vector<DenseLayer> dense;
  Tensor head_weight, head_bias;

  // Trainable tensors in a fixed order (drives Adam slots and checkpoints).
  void for_each_param(const std::function<void(const std::string&, Tensor&)>& fn);
  // Non-trainable state (batch-norm running stats).
  void for_each_state(const std::function<void(const std::string&, Tensor&)>& fn);
  long param_count();
};

// Weights from a fan-scaled uniform distribution (Glorot bounds) drawn from
// the config seed; biases zero. Deterministic per seed.
ModelParams init_model(const ModelConfig& cfg);

// Closed-form trainable-parameter count for a config; equals what
// init_model materializes.
long count_params(const ModelConfig& cfg);

// Builds the forward graph for one batch ([B x steps x N]) on the tape and
// returns the prediction node ([B x output_dim]). In train mode batch norm
// uses batch statistics (updating the running ones) and dropout is active,
// drawing masks from dropout_rng. When param_ids is provided every trainable
// tensor's tape id is recorded there for gradient readback.
Tape::ValueId model_forward(Tape& tape, ModelParams& params, const Tensor& batch,
                            bool train, Rng* dropout_rng = nullptr,
                            std::vector<std::pair<Tensor*, Tape::ValueId>>* param_ids = nullptr);

// Convenience eval-mode forward returning the predictions by value.
Tensor predict(ModelParams& params, const Tensor& batch);

// Checkpoint container: magic, config echo (JSON), named tensors with dims,
// row-major doubles. Bit-exact round-trip.
void save_checkpoint(const std::filesystem::path& path, ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace nk
