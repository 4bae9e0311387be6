#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "neurokinect/tensor.hpp"

namespace nk {

enum class WindowLayout { Flattened, Sequence };

// l past EEG frames plus the current one form each input window; the target
// is the kinematic sample transfer_delay frames after the window's newest
// frame, accounting for the conduction delay from cortex to muscle.
struct WindowConfig {
  int lags = 10;            // l
  int transfer_delay = 4;   // d
  WindowLayout layout = WindowLayout::Sequence;
};

struct SampleRef {
  int trial_index = 0;
  int t = 0;  // window start within the trial
};

// Supervised (input window, target position) pairs.
//
// Sequence layout: inputs is S x (l+1) x N with steps in chronological order
// (step j holds EEG column t + j, so the last step is the newest frame).
// Flattened layout: inputs is S x N*(l+1) with the newest frame first:
// element [i*N + n] holds EEG[n, t + l - i].
// Targets are S x 3, the kinematic columns at t + l + d. Windows never span
// a trial boundary.
struct LaggedDataset {
  Tensor inputs;
  Tensor targets;
  WindowConfig config;
  int n_channels = 0;
  std::vector<SampleRef> provenance;    // one per sample
  std::vector<std::string> trial_ids;   // indexed by SampleRef::trial_index

  long n_samples() const { return targets.rows(); }
  int window_steps() const { return config.lags + 1; }
};

// Windows for one trial. eeg and kin must share the same length T > l + d
// (throws TrialTooShort otherwise).
LaggedDataset build_windows(const Tensor& eeg, const Tensor& kin,
                            const WindowConfig& cfg,
                            const std::string& trial_id = "trial");

// Windows for a whole session, trial by trial.
struct TrialSignals {
  std::string trial_id;
  const Tensor* eeg = nullptr;
  const Tensor* kin = nullptr;
};
LaggedDataset build_dataset(const std::vector<TrialSignals>& trials,
                            const WindowConfig& cfg);

// Split at trial granularity so no temporal neighborhood leaks across
// partitions. Ratios must be positive... zero ratios are allowed but raise
// EmptyPartition, as does any partition that ends up with no trials.
struct SplitRatios {
  double train = 0.7, val = 0.15, test = 0.15;
};
struct DatasetSplit {
  LaggedDataset train, val, test;
};
DatasetSplit split_dataset(const LaggedDataset& ds, const SplitRatios& ratios,
                           std::uint64_t seed);

// Batch index plan for one epoch: covers every sample exactly once, keeps the
// final partial batch, shuffles deterministically per (seed, epoch).
std::vector<std::vector<long>> make_batches(long n_samples, int batch_size,
                                            bool shuffle, std::uint64_t seed,
                                            int epoch);

// Materialize one batch: {B x (l+1) x N or B x N*(l+1), B x 3}.
std::pair<Tensor, Tensor> gather_batch(const LaggedDataset& ds,
                                       const std::vector<long>& indices);

// Binary container (schema in docs/formats.md) plus a CSV export for
// inspection. The binary round-trip is bit-exact.
void save_dataset(const std::filesystem::path& path, const LaggedDataset& ds);
LaggedDataset load_dataset(const std::filesystem::path& path);
void export_dataset_csv(const std::filesystem::path& path, const LaggedDataset& ds);

}  // namespace nk
