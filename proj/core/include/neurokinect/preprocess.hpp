#pragma once

#include <array>
#include <utility>
#include <vector>

#include "neurokinect/tensor.hpp"

namespace nk {

// Per-axis min/max captured when kinematics are mapped into [0,1], kept so
// predictions can be reported back in original units.
struct ScalerParams {
  std::array<double, 3> ax_min{0.0, 0.0, 0.0};
  std::array<double, 3> ax_max{1.0, 1.0, 1.0};
};

// Per-channel mean and population standard deviation.
struct ChannelStats {
  std::vector<double> mu;
  std::vector<double> sigma;
};

enum class FilterMode { Causal, ZeroPhase };
enum class AntiAlias { On, PaperLiteral };

// Band-pass specification. The stopband edges are derived from the passband
// edges and the transition widths below and are therefore sample-rate
// dependent; docs/formats.md lists the realized edges for the rates this
// pipeline runs at. When the upper transition does not fit below Nyquist the
// design degrades to a high-pass (the upper band edge is left open), which
// is the situation at fs = 25 Hz where the 12 Hz passband edge sits within
// 4% of Nyquist.
struct FilterSpec {
  double pass_lo_hz = 0.5;
  double pass_hi_hz = 12.0;
  double stop_atten_db = 60.0;
  FilterMode design = FilterMode::Causal;
  double trans_lo_hz = 0.4;
  double trans_hi_hz = 3.0;
};

// Linear-phase FIR (odd length, symmetric taps).
struct FirFilter {
  std::vector<double> taps;
  int group_delay = 0;  // (taps - 1) / 2
};

// Kaiser-window designs. Frequencies in cycles/sample (normalized by fs).
// Both size the window for `atten_db` plus a 5 dB margin so the measured
// response clears the nominal figure at the band edges.
FirFilter design_fir_bandpass(double pass_lo, double pass_hi, double stop_lo,
                              double stop_hi_or_nyq, double atten_db);
FirFilter design_fir_lowpass(double pass_edge, double stop_edge, double atten_db);

// Bandpass design for a concrete sample rate. Throws UnrealizableSpec when
// the passband does not fit under Nyquist.
FirFilter make_bandpass_filter(const FilterSpec& spec, double fs);

// Filter application over the rows of a channels x time matrix.
// Causal: plain convolution, output delayed by the group delay.
// ZeroPhase: forward-backward pass (zero-padded), no delay, squared response.
// Aligned: causal convolution with the known group delay compensated by an
// index shift, so output sample t reflects input around time t; this is what
// the trial pipeline uses to keep the EEG/kinematics lag structure intact
// (a real-time deployment sees the same samples with a fixed latency).
enum class FilterApply { Causal, ZeroPhase, Aligned };
Tensor filter_rows(const Tensor& signal, const FirFilter& fir, FilterApply how);

// Kinematic scaling to [0,1] per axis. Throws DegenerateAxis when an axis is
// constant.
std::pair<Tensor, ScalerParams> scale_kinematics(const Tensor& kin);
Tensor inverse_scale(const Tensor& scaled, const ScalerParams& params);

// Downsample rows by an integer factor; output length floor(T/factor).
// AntiAlias::On prefixes a Kaiser low-pass at 0.8 x the new Nyquist (applied
// aligned, see above); PaperLiteral takes every factor-th sample as-is.
Tensor decimate(const Tensor& signal, int factor, AntiAlias antialias = AntiAlias::On);

// Subtract the per-channel mean.
Tensor remove_dc(const Tensor& signal);

// Band-pass every channel. Causal/ZeroPhase per spec.design.
Tensor bandpass(const Tensor& signal, const FilterSpec& spec, double fs);
// Pipeline variant: causal design applied with delay compensation.
Tensor bandpass_aligned(const Tensor& signal, const FilterSpec& spec, double fs);

// Per-channel zero-mean unit-variance (population std). Throws ZeroVariance
// with the offending channel index.
std::pair<Tensor, ChannelStats> standardize(const Tensor& signal);

// Truncate EEG at the end to the kinematic length. Throws KinLongerThanEeg.
std::pair<Tensor, Tensor> align_lengths(const Tensor& eeg, const Tensor& kin);

}  // namespace nk
