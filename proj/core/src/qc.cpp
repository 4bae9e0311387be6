#include "neurokinect/qc.hpp"

#include <cmath>
#include <limits>

#include "neurokinect/errors.hpp"

namespace nk {

std::string to_string(QcVerdict v) {
  switch (v) {
    case QcVerdict::Kept: return "kept";
    case QcVerdict::RejectedRt: return "rejected_rt";
    case QcVerdict::RejectedRmse: return "rejected_rmse";
    case QcVerdict::RejectedError: return "rejected_error";
  }
  return "unknown";
}

std::size_t QcReport::kept_count() const {
  std::size_t n = 0;
  for (const auto& t : trials) {
    if (t.verdict == QcVerdict::Kept) ++n;
  }
  return n;
}

std::vector<double> max_moving_average(const Tensor& eeg, long led_onset_sample,
                                       double fs, const QcConfig& cfg) {
  if (cfg.ma_window < 1) {
    throw Error(ErrorKind::InvalidConfig, "ma_window must be >= 1");
  }
  const int t_len = eeg.cols();
  const long span_len = std::lround(cfg.post_led_span_ms / 1000.0 * fs);
  const long begin = led_onset_sample;
  const long end = std::min<long>(t_len, led_onset_sample + span_len);
  const long avail = end - begin;
  if (begin < 0 || avail < cfg.ma_window) {
    throw Error(ErrorKind::SpanTooShort,
                "only " + std::to_string(std::max<long>(avail, 0)) +
                    " samples after the cue, window needs " +
                    std::to_string(cfg.ma_window));
  }
  const int channels = eeg.rows();
  const int w = cfg.ma_window;
  std::vector<double> signature(static_cast<std::size_t>(channels));
  for (int ch = 0; ch < channels; ++ch) {
    const double* row = eeg.ptr() + static_cast<std::size_t>(ch) * t_len;
    // Sliding sum of |x| over the span, full-overlap windows only.
    double sum = 0.0;
    for (long i = begin; i < begin + w; ++i) sum += std::abs(row[i]);
    double best = sum;
    for (long i = begin + w; i < end; ++i) {
      sum += std::abs(row[i]) - std::abs(row[i - w]);
      best = std::max(best, sum);
    }
    signature[static_cast<std::size_t>(ch)] = best / static_cast<double>(w);
  }
  return signature;
}

std::vector<double> build_reference(const std::vector<std::vector<double>>& signatures,
                                    const QcConfig& cfg) {
  if (static_cast<int>(signatures.size()) < cfg.reference_trials) {
    throw Error(ErrorKind::NotEnoughTrials,
                std::to_string(signatures.size()) + " signatures, reference needs " +
                    std::to_string(cfg.reference_trials));
  }
  const std::size_t channels = signatures[0].size();
  std::vector<double> ref(channels, 0.0);
  for (int k = 0; k < cfg.reference_trials; ++k) {
    const auto& s = signatures[static_cast<std::size_t>(k)];
    if (s.size() != channels) {
      throw Error(ErrorKind::ShapeMismatch, "signature length mismatch in reference");
    }
    for (std::size_t ch = 0; ch < channels; ++ch) ref[ch] += s[ch];
  }
  for (auto& v : ref) v /= static_cast<double>(cfg.reference_trials);
  return ref;
}

namespace {

double signature_rmse(const std::vector<double>& sig, const std::vector<double>& ref) {
  double acc = 0.0;
  for (std::size_t ch = 0; ch < sig.size(); ++ch) {
    const double d = sig[ch] - ref[ch];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(sig.size()));
}

}  // namespace

QcReport flag_bad_trials(const std::vector<QcTrialInput>& trials, double fs,
                         const QcConfig& cfg) {
  if (static_cast<int>(trials.size()) < cfg.reference_trials) {
    throw Error(ErrorKind::NotEnoughTrials,
                "session has " + std::to_string(trials.size()) +
                    " trials, reference needs " + std::to_string(cfg.reference_trials));
  }
  // Signatures for the reference block come first; they are used regardless
  // of those trials' own verdicts (early trials carry the most attentive
  // responses, and a realtime system cannot wait for the whole session).
  std::vector<std::vector<double>> ref_signatures;
  ref_signatures.reserve(static_cast<std::size_t>(cfg.reference_trials));
  for (int k = 0; k < cfg.reference_trials; ++k) {
    const auto& t = trials[static_cast<std::size_t>(k)];
    ref_signatures.push_back(max_moving_average(*t.eeg, t.led_onset_sample, fs, cfg));
  }
  QcReport report;
  report.reference_signature = build_reference(ref_signatures, cfg);

  for (std::size_t k = 0; k < trials.size(); ++k) {
    const auto& t = trials[k];
    QcTrialResult r;
    r.trial_id = t.trial_id;
    r.response_time_s = t.response_time_s;
    r.rmse = std::numeric_limits<double>::quiet_NaN();
    if (t.response_time_s > cfg.rt_limit_s) {
      r.verdict = QcVerdict::RejectedRt;
      report.trials.push_back(std::move(r));
      continue;
    }
    try {
      const auto sig =
          k < ref_signatures.size()
              ? ref_signatures[k]
              : max_moving_average(*t.eeg, t.led_onset_sample, fs, cfg);
      r.rmse = signature_rmse(sig, report.reference_signature);
      r.verdict = r.rmse > cfg.rmse_threshold ? QcVerdict::RejectedRmse : QcVerdict::Kept;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SpanTooShort) throw;
      r.verdict = QcVerdict::RejectedError;
      r.note = e.what();
    }
    report.trials.push_back(std::move(r));
  }
  return report;
}

}  // namespace nk
