#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "neurokinect/dataset.hpp"
#include "neurokinect/loss.hpp"
#include "neurokinect/metrics.hpp"
#include "neurokinect/model.hpp"

namespace nk {

// Keep-best rule evaluated after each epoch: save when correlation improves,
// or when it stays within rho_tolerance of the best while the MSE drops.
// best_rho_3d is non-decreasing over a run.
struct CheckpointPolicy {
  double best_rho_3d = -std::numeric_limits<double>::infinity();
  double best_mse_3d = std::numeric_limits<double>::infinity();
  double rho_tolerance = 0.005;

  bool should_save(const MetricsReport& val) const {
    if (val.rho_3d > best_rho_3d) return true;
    return val.rho_3d >= best_rho_3d - rho_tolerance && val.mse_3d < best_mse_3d;
  }
  void record_save(const MetricsReport& val) {
    best_rho_3d = std::max(best_rho_3d, val.rho_3d);
    best_mse_3d = val.mse_3d;
  }
};

struct EpochRecord {
  int epoch = 0;  // 1-based, contiguous
  LossValue train_loss;  // mean per batch over the epoch
  MetricsReport val;
  bool checkpoint_taken = false;
};

struct TrainOptions {
  int epochs = 15;
  int batch_size = 100;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double checkpoint_rho_tolerance = 0.005;
  std::filesystem::path checkpoint_path;  // empty: track best in memory only
  bool verbose = false;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  double wall_time_s = 0.0;
  std::filesystem::path checkpoint_path;
  MetricsReport best_val;
};

// Full training loop: shuffled batches, per-axis statistical loss summed over
// the three axes, Adam updates, per-epoch validation metrics and the
// checkpoint policy above. Deterministic for a fixed (options.seed, data).
// Throws NonFiniteLoss with epoch/batch context if the loss diverges.
TrainReport train_model(ModelParams& params, const LaggedDataset& train_ds,
                        const LaggedDataset& val_ds, const TrainOptions& options);

// Eval-mode forward over the whole split (in batches); metrics over the
// concatenated predictions. Optionally returns the predictions.
MetricsReport evaluate_split(ModelParams& params, const LaggedDataset& ds,
                             Tensor* predictions_out = nullptr,
                             int batch_size = 256);

}  // namespace nk
