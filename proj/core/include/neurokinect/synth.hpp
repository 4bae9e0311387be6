#pragma once

#include <cstdint>
#include <filesystem>

#include "neurokinect/dataset.hpp"
#include "neurokinect/ingest.hpp"
#include "neurokinect/metrics.hpp"

namespace nk {

// Synthetic sessions with a known lagged EEG -> kinematics coupling, used as
// the desk-scale ground truth for the whole pipeline. The informative
// channels carry band-limited (0.5-12 Hz) signals; the kinematics are a fixed
// linear mixture of those signals from true_lag_samples earlier (expressed at
// decoded_rate_hz), so a linear readout over lagged windows can reconstruct
// them up to the injected noise.
struct SynthConfig {
  int n_channels = 32;
  double fs = 500.0;
  int n_trials = 50;
  double trial_len_s = 7.0;  // cue to movement stop
  int informative_channels = 4;
  int true_lag_samples = 7;  // at decoded_rate_hz; window l=10, d=4 covers [4, 14]
  double noise_snr_db = 10.0;  // +infinity disables noise
  std::uint64_t seed = 0;

  double decoded_rate_hz = 25.0;
  double pre_led_s = 2.0;    // recording padding before the cue
  double post_stop_s = 2.0;  // and after movement stop
  double rt_mean_s = 0.36;
  double rt_sd_s = 0.06;
  double eeg_amplitude = 10.0;  // nominal microvolt scale
};

// Writes a full session (manifest + per-trial CSVs) under out_dir and returns
// the manifest. Byte-identical for identical configs.
SessionManifest generate_session(const SynthConfig& cfg,
                                 const std::filesystem::path& out_dir);

// Ordinary least squares from flattened lag windows (plus bias) to targets,
// fit on the train split and scored on the validation split: an independent
// linear baseline any trained model should approach. Falls back to ridge
// (lambda = 1e-6) when the normal equations are singular.
struct LinearBaselineResult {
  MetricsReport val;
  bool used_ridge = false;
};
LinearBaselineResult linear_baseline(const LaggedDataset& full_dataset,
                                     const SplitRatios& ratios, std::uint64_t seed);

// Same fit, scored on caller-provided splits.
LinearBaselineResult linear_baseline_on(const LaggedDataset& train,
                                        const LaggedDataset& val);

}  // namespace nk
