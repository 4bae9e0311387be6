#include "neurokinect/erp.hpp"

#include <cmath>

#include "neurokinect/errors.hpp"

namespace nk {

int Epochs::baseline_samples() const {
  return static_cast<int>(std::lround(window.pre_ms / 1000.0 * fs));
}

Epochs epoch_trials(const std::vector<EpochInput>& trials, double fs,
                    const EpochWindow& window, const FilterSpec& filter) {
  if (trials.empty()) throw Error(ErrorKind::EmptyInput, "no trials to epoch");
  const int pre = static_cast<int>(std::lround(window.pre_ms / 1000.0 * fs));
  const int post = static_cast<int>(std::lround(window.post_ms / 1000.0 * fs));
  const int t_epoch = pre + post;
  const int channels = trials[0].eeg->rows();

  Epochs ep;
  ep.fs = fs;
  ep.window = window;
  ep.data = Tensor({static_cast<int>(trials.size()), channels, t_epoch});

  for (std::size_t k = 0; k < trials.size(); ++k) {
    const auto& t = trials[k];
    if (t.eeg->rows() != channels) {
      throw Error(ErrorKind::ShapeMismatch, t.trial_id + ": channel count mismatch");
    }
    const long led = t.led_onset_sample;
    if (led < pre || led + post > t.eeg->cols()) {
      throw Error(ErrorKind::InsufficientPrePost,
                  t.trial_id + ": needs " + std::to_string(pre) + " samples before and " +
                      std::to_string(post) + " after the cue (led at " +
                      std::to_string(led) + " of " + std::to_string(t.eeg->cols()) + ")");
    }
    const Tensor filtered = bandpass_aligned(*t.eeg, filter, fs);
    for (int ch = 0; ch < channels; ++ch) {
      const double* src = filtered.ptr() + static_cast<std::size_t>(ch) * filtered.cols() +
                          (led - pre);
      double* dst = ep.data.ptr() +
                    (static_cast<std::size_t>(k) * channels + ch) * t_epoch;
      std::copy(src, src + t_epoch, dst);
    }
  }
  return ep;
}

Epochs baseline_correct(const Epochs& epochs) {
  const int base = epochs.baseline_samples();
  if (base < 1 || base > epochs.epoch_len()) {
    throw Error(ErrorKind::InvalidConfig, "baseline span outside the epoch");
  }
  Epochs out = epochs;
  const int trials = epochs.n_trials();
  const int channels = epochs.n_channels();
  const int t_epoch = epochs.epoch_len();
  for (int k = 0; k < trials; ++k) {
    for (int ch = 0; ch < channels; ++ch) {
      double* row = out.data.ptr() + (static_cast<std::size_t>(k) * channels + ch) * t_epoch;
      double mean = 0.0;
      for (int t = 0; t < base; ++t) mean += row[t];
      mean /= static_cast<double>(base);
      for (int t = 0; t < t_epoch; ++t) row[t] -= mean;
    }
  }
  return out;
}

ErpResult erp_averages(const std::vector<std::string>& subject_ids,
                       const std::vector<const Epochs*>& subject_epochs) {
  if (subject_epochs.empty() || subject_ids.size() != subject_epochs.size()) {
    throw Error(ErrorKind::EmptyInput, "need at least one subject with epochs");
  }
  const int channels = subject_epochs[0]->n_channels();
  const int t_epoch = subject_epochs[0]->epoch_len();

  ErpResult result;
  result.subject_ids = subject_ids;
  result.grand_average = Tensor({channels, t_epoch});

  for (const Epochs* ep : subject_epochs) {
    if (ep->n_trials() < 1) {
      throw Error(ErrorKind::EmptyInput, "subject with zero trials");
    }
    if (ep->n_channels() != channels || ep->epoch_len() != t_epoch) {
      throw Error(ErrorKind::ShapeMismatch, "subjects have mismatched epoch shapes");
    }
    Tensor avg({channels, t_epoch});
    const int trials = ep->n_trials();
    for (int k = 0; k < trials; ++k) {
      const double* src = ep->data.ptr() +
                          static_cast<std::size_t>(k) * channels * t_epoch;
      for (std::size_t i = 0; i < avg.data.size(); ++i) avg.data[i] += src[i];
    }
    for (auto& v : avg.data) v /= static_cast<double>(trials);
    for (std::size_t i = 0; i < avg.data.size(); ++i) {
      result.grand_average.data[i] += avg.data[i];
    }
    result.subject_averages.push_back(std::move(avg));
  }
  for (auto& v : result.grand_average.data) {
    v /= static_cast<double>(subject_epochs.size());
  }
  result.erp_trace.assign(static_cast<std::size_t>(t_epoch), 0.0);
  for (int ch = 0; ch < channels; ++ch) {
    const double* row = result.grand_average.ptr() + static_cast<std::size_t>(ch) * t_epoch;
    for (int t = 0; t < t_epoch; ++t) result.erp_trace[static_cast<std::size_t>(t)] += row[t];
  }
  return result;
}

}  // namespace nk
