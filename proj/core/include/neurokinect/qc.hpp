#pragma once

#include <string>
#include <vector>

#include "neurokinect/tensor.hpp"

namespace nk {

// Bad-trial screening: a response-time gate plus an amplitude-signature test.
// Each trial's signature is, per channel, the maximum of a short moving
// average of |EEG| over the window following the cue; trials whose signature
// strays too far (RMSE across channels) from a reference built on the first
// few trials are rejected. The signature is meant to run on band-passed,
// non-standardized data: standardizing first would erase the amplitude
// information the test depends on.
struct QcConfig {
  int ma_window = 5;               // samples
  double post_led_span_ms = 1500.0;
  double rt_limit_s = 0.5;
  double rmse_threshold = 100.0;
  int reference_trials = 10;
};

// The two thresholds in common use; which one applies is a per-run choice.
inline constexpr double kQcThresholdStrict = 100.0;
inline constexpr double kQcThresholdLenient = 150.0;

enum class QcVerdict { Kept, RejectedRt, RejectedRmse, RejectedError };

std::string to_string(QcVerdict v);

struct QcTrialResult {
  std::string trial_id;
  QcVerdict verdict = QcVerdict::Kept;
  double response_time_s = 0.0;
  double rmse = 0.0;
  std::string note;
};

struct QcReport {
  std::vector<QcTrialResult> trials;
  std::vector<double> reference_signature;

  std::size_t kept_count() const;
};

// What the QC stage needs per trial: the (already filtered) EEG at `fs`, the
// cue position in that EEG's timebase, and the response time.
struct QcTrialInput {
  std::string trial_id;
  const Tensor* eeg = nullptr;  // channels x time
  long led_onset_sample = 0;
  double response_time_s = 0.0;
};

// Per-channel max moving average of |EEG| over [led, led + post_led_span].
// Throws SpanTooShort when fewer than ma_window samples are available.
std::vector<double> max_moving_average(const Tensor& eeg, long led_onset_sample,
                                       double fs, const QcConfig& cfg);

// Element-wise mean of the first reference_trials signatures. Throws
// NotEnoughTrials.
std::vector<double> build_reference(const std::vector<std::vector<double>>& signatures,
                                    const QcConfig& cfg);

// Applies the response-time gate and the RMSE rule to a whole session. The
// reference is built from the first reference_trials trials in session order
// regardless of their own verdicts. Per-trial signature failures are recorded
// as RejectedError rather than aborting the session.
QcReport flag_bad_trials(const std::vector<QcTrialInput>& trials, double fs,
                         const QcConfig& cfg);

}  // namespace nk
