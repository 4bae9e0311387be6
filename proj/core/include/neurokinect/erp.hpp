#pragma once

#include <string>
#include <vector>

#include "neurokinect/preprocess.hpp"
#include "neurokinect/tensor.hpp"

namespace nk {

// Cue-locked epoch window.
struct EpochWindow {
  double pre_ms = 1000.0;
  double post_ms = 6000.0;
};

// Cue-locked, band-passed trial segments: trials x channels x T_epoch at the
// rate they were cut from. The baseline span is the pre-onset portion.
struct Epochs {
  Tensor data;  // {trials, channels, T_epoch}
  double fs = 0.0;
  EpochWindow window;

  int n_trials() const { return data.shape.empty() ? 0 : data.shape[0]; }
  int n_channels() const { return data.shape.size() > 1 ? data.shape[1] : 0; }
  int epoch_len() const { return data.shape.size() > 2 ? data.shape[2] : 0; }
  int baseline_samples() const;
};

struct ErpResult {
  std::vector<std::string> subject_ids;
  std::vector<Tensor> subject_averages;  // channels x T_epoch each
  Tensor grand_average;                  // channels x T_epoch
  std::vector<double> erp_trace;         // T_epoch, grand average summed over channels
};

struct EpochInput {
  std::string trial_id;
  const Tensor* eeg = nullptr;  // channels x time at fs
  long led_onset_sample = 0;
};

// Cuts [led - pre, led + post) segments. The band-pass runs over each full
// recording before the cut so filter transients land in the surrounding
// padding rather than inside the epoch. Throws InsufficientPrePost naming
// the trial when a recording cannot host the window.
Epochs epoch_trials(const std::vector<EpochInput>& trials, double fs,
                    const EpochWindow& window, const FilterSpec& filter);

// Subtracts each trial/channel's pre-onset mean. Idempotent.
Epochs baseline_correct(const Epochs& epochs);

// Trial mean per subject, then subject mean (equal weight per subject, not
// per trial) for the grand average; erp_trace sums the grand average across
// channels. Throws EmptyInput.
ErpResult erp_averages(const std::vector<std::string>& subject_ids,
                       const std::vector<const Epochs*>& subject_epochs);

}  // namespace nk
