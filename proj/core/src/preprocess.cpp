#include "neurokinect/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "neurokinect/errors.hpp"
#include "neurokinect/fft.hpp"

namespace nk {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Extra attenuation designed in so the measured stopband clears the nominal
// figure.
constexpr double kDesignMarginDb = 5.0;

double bessel_i0(double x) {
  // Power series; converges fast for the beta values Kaiser designs use.
  double sum = 1.0, term = 1.0;
  const double half_x = x / 2.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half_x / k) * (half_x / k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

double kaiser_beta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0) {
    return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  }
  return 0.0;
}

int kaiser_length(double atten_db, double trans_norm) {
  // trans_norm in cycles/sample.
  const double delta_omega = 2.0 * kPi * trans_norm;
  int n = static_cast<int>(std::ceil((atten_db - 7.95) / (2.285 * delta_omega))) + 1;
  if (n % 2 == 0) ++n;  // symmetric, integer group delay
  return std::max(n, 3);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// |H(f)| of a real FIR at normalized frequency f (cycles/sample).
double fir_response(const std::vector<double>& taps, double f) {
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < taps.size(); ++n) {
    const double w = 2.0 * kPi * f * static_cast<double>(n);
    re += taps[n] * std::cos(w);
    im -= taps[n] * std::sin(w);
  }
  return std::sqrt(re * re + im * im);
}

std::vector<double> kaiser_window(int n, double beta) {
  std::vector<double> w(static_cast<std::size_t>(n));
  const double denom = bessel_i0(beta);
  const double m = static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    const double r = 2.0 * static_cast<double>(i) / m - 1.0;
    w[static_cast<std::size_t>(i)] = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
  }
  return w;
}

void require_2d_signal(const Tensor& t, const char* what) {
  if (t.shape.size() != 2 || t.rows() < 1 || t.cols() < 1) {
    throw Error(ErrorKind::ShapeMismatch,
                std::string(what) + " expects channels x time, got " + t.shape_str());
  }
}

}  // namespace

FirFilter design_fir_bandpass(double pass_lo, double pass_hi, double stop_lo,
                              double stop_hi_or_nyq, double atten_db) {
  const double design_db = atten_db + kDesignMarginDb;
  const double trans_lo = pass_lo - stop_lo;
  const bool has_upper = stop_hi_or_nyq < 0.5;
  const double trans_hi = has_upper ? stop_hi_or_nyq - pass_hi : trans_lo;
  const double trans = std::min(trans_lo, trans_hi);
  if (trans <= 0.0) {
    throw Error(ErrorKind::UnrealizableSpec, "non-positive transition width");
  }
  const int n = kaiser_length(design_db, trans);
  const double beta = kaiser_beta(design_db);
  const auto window = kaiser_window(n, beta);

  // Ideal band edges at the transition midpoints; when the upper stopband is
  // off the table the high cutoff collapses to Nyquist and the first sinc
  // term becomes a unit impulse (pure high-pass behaviour).
  const double f1 = stop_lo + trans_lo / 2.0;
  const double f2 = has_upper ? pass_hi + trans_hi / 2.0 : 0.5;

  FirFilter fir;
  fir.taps.resize(static_cast<std::size_t>(n));
  fir.group_delay = (n - 1) / 2;
  const double m = static_cast<double>(fir.group_delay);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) - m;
    const double ideal = 2.0 * f2 * sinc(2.0 * f2 * t) - 2.0 * f1 * sinc(2.0 * f1 * t);
    fir.taps[static_cast<std::size_t>(i)] = ideal * window[static_cast<std::size_t>(i)];
  }
  // Normalize gain at the passband's geometric center.
  const double fc = std::sqrt(std::max(f1, 1e-9) * std::min(f2, 0.5 - 1e-9));
  const double g = fir_response(fir.taps, fc);
  if (g > 0.0) {
    for (auto& t : fir.taps) t /= g;
  }
  return fir;
}

FirFilter design_fir_lowpass(double pass_edge, double stop_edge, double atten_db) {
  const double design_db = atten_db + kDesignMarginDb;
  const double trans = stop_edge - pass_edge;
  if (trans <= 0.0) {
    throw Error(ErrorKind::UnrealizableSpec, "non-positive transition width");
  }
  const int n = kaiser_length(design_db, trans);
  const double beta = kaiser_beta(design_db);
  const auto window = kaiser_window(n, beta);
  const double fc = (pass_edge + stop_edge) / 2.0;

  FirFilter fir;
  fir.taps.resize(static_cast<std::size_t>(n));
  fir.group_delay = (n - 1) / 2;
  const double m = static_cast<double>(fir.group_delay);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) - m;
    fir.taps[static_cast<std::size_t>(i)] =
        2.0 * fc * sinc(2.0 * fc * t) * window[static_cast<std::size_t>(i)];
    sum += fir.taps[static_cast<std::size_t>(i)];
  }
  for (auto& t : fir.taps) t /= sum;  // unit DC gain
  return fir;
}

FirFilter make_bandpass_filter(const FilterSpec& spec, double fs) {
  const double nyq = fs / 2.0;
  if (!(spec.pass_lo_hz > 0.0) || !(spec.pass_lo_hz < spec.pass_hi_hz) ||
      !(spec.pass_hi_hz < nyq)) {
    throw Error(ErrorKind::UnrealizableSpec,
                "passband [" + std::to_string(spec.pass_lo_hz) + ", " +
                    std::to_string(spec.pass_hi_hz) + "] Hz does not fit under fs/2 = " +
                    std::to_string(nyq) + " Hz");
  }
  const double stop_lo = std::max(0.0, spec.pass_lo_hz - spec.trans_lo_hz);
  const double stop_hi = spec.pass_hi_hz + spec.trans_hi_hz;
  const double stop_hi_norm = stop_hi < nyq ? stop_hi / fs : 0.5;
  return design_fir_bandpass(spec.pass_lo_hz / fs, spec.pass_hi_hz / fs,
                             stop_lo / fs, stop_hi_norm, spec.stop_atten_db);
}

Tensor filter_rows(const Tensor& signal, const FirFilter& fir, FilterApply how) {
  require_2d_signal(signal, "filter_rows");
  const int channels = signal.rows();
  const int t_len = signal.cols();
  Tensor out({channels, t_len});
  std::vector<double> row(static_cast<std::size_t>(t_len));
  for (int ch = 0; ch < channels; ++ch) {
    const double* src = signal.ptr() + static_cast<std::size_t>(ch) * t_len;
    row.assign(src, src + t_len);
    std::vector<double> filtered;
    switch (how) {
      case FilterApply::Causal: {
        auto full = convolve(row, fir.taps);
        filtered.assign(full.begin(), full.begin() + t_len);
        break;
      }
      case FilterApply::Aligned: {
        auto full = convolve(row, fir.taps);
        filtered.assign(full.begin() + fir.group_delay,
                        full.begin() + fir.group_delay + t_len);
        break;
      }
      case FilterApply::ZeroPhase: {
        auto fwd = convolve(row, fir.taps);
        std::reverse(fwd.begin(), fwd.end());
        auto back = convolve(fwd, fir.taps);
        std::reverse(back.begin(), back.end());
        // back has length t_len + 2*(taps-1); the centered t_len samples are
        // the zero-phase output.
        const std::size_t off = fir.taps.size() - 1;
        filtered.assign(back.begin() + static_cast<std::ptrdiff_t>(off),
                        back.begin() + static_cast<std::ptrdiff_t>(off) + t_len);
        break;
      }
    }
    double* dst = out.ptr() + static_cast<std::size_t>(ch) * t_len;
    std::copy(filtered.begin(), filtered.end(), dst);
  }
  return out;
}

std::pair<Tensor, ScalerParams> scale_kinematics(const Tensor& kin) {
  require_2d_signal(kin, "scale_kinematics");
  if (kin.rows() != 3) {
    throw Error(ErrorKind::ShapeMismatch, "kinematics must be 3 x T, got " + kin.shape_str());
  }
  const int t_len = kin.cols();
  ScalerParams params;
  Tensor scaled({3, t_len});
  static const char* axis_names[] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    const double* src = kin.ptr() + static_cast<std::size_t>(a) * t_len;
    double lo = src[0], hi = src[0];
    for (int t = 1; t < t_len; ++t) {
      lo = std::min(lo, src[t]);
      hi = std::max(hi, src[t]);
    }
    if (hi == lo) {
      throw Error(ErrorKind::DegenerateAxis,
                  std::string("axis ") + axis_names[a] + " is constant");
    }
    params.ax_min[static_cast<std::size_t>(a)] = lo;
    params.ax_max[static_cast<std::size_t>(a)] = hi;
    const double inv = 1.0 / (hi - lo);
    double* dst = scaled.ptr() + static_cast<std::size_t>(a) * t_len;
    for (int t = 0; t < t_len; ++t) dst[t] = (src[t] - lo) * inv;
  }
  return {std::move(scaled), params};
}

Tensor inverse_scale(const Tensor& scaled, const ScalerParams& params) {
  require_2d_signal(scaled, "inverse_scale");
  if (scaled.rows() != 3) {
    throw Error(ErrorKind::ShapeMismatch, "scaled kinematics must be 3 x T");
  }
  const int t_len = scaled.cols();
  Tensor out({3, t_len});
  for (int a = 0; a < 3; ++a) {
    const double lo = params.ax_min[static_cast<std::size_t>(a)];
    const double range = params.ax_max[static_cast<std::size_t>(a)] - lo;
    const double* src = scaled.ptr() + static_cast<std::size_t>(a) * t_len;
    double* dst = out.ptr() + static_cast<std::size_t>(a) * t_len;
    for (int t = 0; t < t_len; ++t) dst[t] = src[t] * range + lo;
  }
  return out;
}

Tensor decimate(const Tensor& signal, int factor, AntiAlias antialias) {
  require_2d_signal(signal, "decimate");
  if (factor < 1) {
    throw Error(ErrorKind::InvalidConfig, "decimation factor must be >= 1");
  }
  const int t_len = signal.cols();
  const int out_len = t_len / factor;
  if (out_len < 2) {
    throw Error(ErrorKind::FactorTooLarge,
                "decimating " + std::to_string(t_len) + " samples by " +
                    std::to_string(factor) + " leaves fewer than 2");
  }
  const int channels = signal.rows();
  Tensor out({channels, out_len});

  if (antialias == AntiAlias::PaperLiteral) {
    for (int ch = 0; ch < channels; ++ch) {
      const double* src = signal.ptr() + static_cast<std::size_t>(ch) * t_len;
      double* dst = out.ptr() + static_cast<std::size_t>(ch) * out_len;
      for (int k = 0; k < out_len; ++k) dst[k] = src[static_cast<std::size_t>(k) * factor];
    }
    return out;
  }

  // Low-pass at 0.8 x the post-decimation Nyquist, stop edge at the new
  // Nyquist itself; applied aligned so output sample k sits at input sample
  // k * factor.
  const double new_nyq = 0.5 / static_cast<double>(factor);
  const FirFilter fir = design_fir_lowpass(0.8 * new_nyq, new_nyq, 60.0);
  const Tensor filtered = filter_rows(signal, fir, FilterApply::Aligned);
  for (int ch = 0; ch < channels; ++ch) {
    const double* src = filtered.ptr() + static_cast<std::size_t>(ch) * t_len;
    double* dst = out.ptr() + static_cast<std::size_t>(ch) * out_len;
    for (int k = 0; k < out_len; ++k) dst[k] = src[static_cast<std::size_t>(k) * factor];
  }
  return out;
}

Tensor remove_dc(const Tensor& signal) {
  require_2d_signal(signal, "remove_dc");
  const int channels = signal.rows();
  const int t_len = signal.cols();
  Tensor out({channels, t_len});
  for (int ch = 0; ch < channels; ++ch) {
    const double* src = signal.ptr() + static_cast<std::size_t>(ch) * t_len;
    double mean = 0.0;
    for (int t = 0; t < t_len; ++t) mean += src[t];
    mean /= static_cast<double>(t_len);
    double* dst = out.ptr() + static_cast<std::size_t>(ch) * t_len;
    for (int t = 0; t < t_len; ++t) dst[t] = src[t] - mean;
  }
  return out;
}

Tensor bandpass(const Tensor& signal, const FilterSpec& spec, double fs) {
  const FirFilter fir = make_bandpass_filter(spec, fs);
  return filter_rows(signal, fir,
                     spec.design == FilterMode::ZeroPhase ? FilterApply::ZeroPhase
                                                          : FilterApply::Causal);
}

Tensor bandpass_aligned(const Tensor& signal, const FilterSpec& spec, double fs) {
  const FirFilter fir = make_bandpass_filter(spec, fs);
  return filter_rows(signal, fir,
                     spec.design == FilterMode::ZeroPhase ? FilterApply::ZeroPhase
                                                          : FilterApply::Aligned);
}

std::pair<Tensor, ChannelStats> standardize(const Tensor& signal) {
  require_2d_signal(signal, "standardize");
  const int channels = signal.rows();
  const int t_len = signal.cols();
  ChannelStats stats;
  stats.mu.resize(static_cast<std::size_t>(channels));
  stats.sigma.resize(static_cast<std::size_t>(channels));
  Tensor out({channels, t_len});
  for (int ch = 0; ch < channels; ++ch) {
    const double* src = signal.ptr() + static_cast<std::size_t>(ch) * t_len;
    double mean = 0.0;
    for (int t = 0; t < t_len; ++t) mean += src[t];
    mean /= static_cast<double>(t_len);
    double var = 0.0;
    for (int t = 0; t < t_len; ++t) {
      const double d = src[t] - mean;
      var += d * d;
    }
    var /= static_cast<double>(t_len);  // population variance
    if (var == 0.0) {
      throw Error(ErrorKind::ZeroVariance,
                  "channel " + std::to_string(ch) + " is flat");
    }
    const double inv_sd = 1.0 / std::sqrt(var);
    stats.mu[static_cast<std::size_t>(ch)] = mean;
    stats.sigma[static_cast<std::size_t>(ch)] = std::sqrt(var);
    double* dst = out.ptr() + static_cast<std::size_t>(ch) * t_len;
    for (int t = 0; t < t_len; ++t) dst[t] = (src[t] - mean) * inv_sd;
  }
  return {std::move(out), std::move(stats)};
}

std::pair<Tensor, Tensor> align_lengths(const Tensor& eeg, const Tensor& kin) {
  require_2d_signal(eeg, "align_lengths eeg");
  require_2d_signal(kin, "align_lengths kin");
  const int t_e = eeg.cols();
  const int t_k = kin.cols();
  if (t_k > t_e) {
    throw Error(ErrorKind::KinLongerThanEeg,
                "kinematics has " + std::to_string(t_k) + " samples, EEG only " +
                    std::to_string(t_e));
  }
  if (t_k == t_e) return {eeg, kin};
  const int channels = eeg.rows();
  Tensor cut({channels, t_k});
  for (int ch = 0; ch < channels; ++ch) {
    const double* src = eeg.ptr() + static_cast<std::size_t>(ch) * t_e;
    double* dst = cut.ptr() + static_cast<std::size_t>(ch) * t_k;
    std::copy(src, src + t_k, dst);
  }
  return {std::move(cut), kin};
}

}  // namespace nk
