#include "neurokinect/synth.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "neurokinect/errors.hpp"
#include "neurokinect/rng.hpp"

namespace nk {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Band-limited signal built from randomly chosen DFT bins of the t_len grid,
// so its spectrum on that grid is exactly confined to [lo_hz, hi_hz].
// Amplitudes fall off toward higher frequencies for a natural 1/f-ish look.
std::vector<double> bandlimited_signal(int t_len, double fs, double lo_hz,
                                       double hi_hz, int n_components, Rng& rng) {
  const double duration = static_cast<double>(t_len) / fs;
  const long k_lo = static_cast<long>(std::ceil(lo_hz * duration));
  const long k_hi = static_cast<long>(std::floor(hi_hz * duration));
  if (k_lo < 1 || k_hi < k_lo) {
    throw Error(ErrorKind::InvalidConfig, "band does not contain a grid frequency");
  }
  std::vector<double> out(static_cast<std::size_t>(t_len), 0.0);
  for (int c = 0; c < n_components; ++c) {
    const long k = k_lo + static_cast<long>(rng.below(static_cast<std::uint64_t>(k_hi - k_lo + 1)));
    const double f = static_cast<double>(k) / duration;
    const double amp = (0.3 + rng.uniform01()) / std::sqrt(f);
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    const double w = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(t_len);
    for (int t = 0; t < t_len; ++t) out[static_cast<std::size_t>(t)] += amp * std::cos(w * t + phase);
  }
  // Unit variance.
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(t_len);
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  var /= static_cast<double>(t_len);
  const double inv_sd = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
  for (auto& v : out) v = (v - mean) * inv_sd;
  return out;
}

}  // namespace

SessionManifest generate_session(const SynthConfig& cfg,
                                 const std::filesystem::path& out_dir) {
  if (cfg.n_channels < 1 || cfg.n_trials < 1 || cfg.informative_channels < 0 ||
      cfg.informative_channels > cfg.n_channels || cfg.true_lag_samples < 0 ||
      !(cfg.fs > 0.0) || !(cfg.trial_len_s > 0.0) ||
      !(cfg.decoded_rate_hz > 0.0) || cfg.fs < 2.0 * 12.0) {
    throw Error(ErrorKind::InvalidConfig, "bad synthetic session config");
  }
  Rng rng(Rng::derive(cfg.seed, rng_stream::kSynth));

  const int t_file = static_cast<int>(
      std::lround((cfg.pre_led_s + cfg.trial_len_s + cfg.post_stop_s) * cfg.fs));
  const long led = std::lround(cfg.pre_led_s * cfg.fs);
  const long stop = led + std::lround(cfg.trial_len_s * cfg.fs);
  const int lag_src = static_cast<int>(
      std::lround(cfg.true_lag_samples * cfg.fs / cfg.decoded_rate_hz));
  const int k_inf = cfg.informative_channels;
  const bool noiseless = std::isinf(cfg.noise_snr_db);
  const double noise_var = noiseless ? 0.0 : std::pow(10.0, -cfg.noise_snr_db / 10.0);

  // Fixed kinematic readout across the session: kin(t) = Q * u(t - lag).
  std::vector<std::vector<double>> readout(3, std::vector<double>(std::max(k_inf, 1)));
  for (auto& row : readout) {
    double norm = 0.0;
    for (auto& v : row) {
      v = rng.gaussian();
      norm += v * v;
    }
    norm = std::sqrt(std::max(norm, 1e-12));
    for (auto& v : row) v /= norm;
  }

  SessionManifest manifest;
  manifest.subject_id = "synth";
  manifest.sample_rate_hz = cfg.fs;
  manifest.n_channels = cfg.n_channels;
  manifest.root = out_dir;

  struct PendingTrial {
    TrialEntry entry;
    Tensor eeg;
    Tensor kin;
  };
  std::vector<PendingTrial> pending;
  double kin_min[3], kin_max[3];
  for (int a = 0; a < 3; ++a) {
    kin_min[a] = std::numeric_limits<double>::infinity();
    kin_max[a] = -std::numeric_limits<double>::infinity();
  }

  for (int trial = 0; trial < cfg.n_trials; ++trial) {
    // Plausible response time; occasional slow responses above the QC limit
    // are intentional.
    const double rt = std::max(0.1, rng.gaussian(cfg.rt_mean_s, cfg.rt_sd_s));
    const long start = led + std::lround(rt * cfg.fs);

    PendingTrial pt;
    pt.entry.trial_id = "t" + std::string(3 - std::to_string(trial).size(), '0') +
                        std::to_string(trial);
    pt.entry.eeg_path = pt.entry.trial_id + "_eeg.csv";
    pt.entry.kin_path = pt.entry.trial_id + "_kin.csv";
    pt.entry.led_onset_sample = led;
    pt.entry.movement_start_sample = start;
    pt.entry.movement_stop_sample = stop;

    std::vector<std::vector<double>> sources;
    sources.reserve(static_cast<std::size_t>(k_inf));
    for (int c = 0; c < k_inf; ++c) {
      sources.push_back(bandlimited_signal(t_file, cfg.fs, 0.5, 12.0, 24, rng));
    }

    pt.eeg = Tensor({cfg.n_channels, t_file});
    for (int ch = 0; ch < cfg.n_channels; ++ch) {
      double* row = pt.eeg.ptr() + static_cast<std::size_t>(ch) * t_file;
      if (ch < k_inf) {
        for (int t = 0; t < t_file; ++t) row[t] = sources[static_cast<std::size_t>(ch)][static_cast<std::size_t>(t)];
        if (!noiseless) {
          const auto noise = bandlimited_signal(t_file, cfg.fs, 0.5, 12.0, 24, rng);
          const double g = std::sqrt(noise_var);
          for (int t = 0; t < t_file; ++t) row[t] += g * noise[static_cast<std::size_t>(t)];
        }
      } else {
        const auto noise = bandlimited_signal(t_file, cfg.fs, 0.5, 12.0, 24, rng);
        for (int t = 0; t < t_file; ++t) row[t] = noise[static_cast<std::size_t>(t)];
      }
      for (int t = 0; t < t_file; ++t) row[t] *= cfg.eeg_amplitude;
    }

    const int t_kin = static_cast<int>(stop - start);
    pt.kin = Tensor({3, t_kin});
    for (int a = 0; a < 3; ++a) {
      double* row = pt.kin.ptr() + static_cast<std::size_t>(a) * t_kin;
      for (int t = 0; t < t_kin; ++t) {
        const int src_t = (static_cast<int>(start) + t - lag_src + t_file) % t_file;
        double v = 0.0;
        for (int c = 0; c < k_inf; ++c) {
          v += readout[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)] *
               sources[static_cast<std::size_t>(c)][static_cast<std::size_t>(src_t)];
        }
        row[t] = v;
        kin_min[a] = std::min(kin_min[a], v);
        kin_max[a] = std::max(kin_max[a], v);
      }
      if (k_inf == 0) {
        // Nothing informative: make the trajectory independent smooth motion.
        const auto wander = bandlimited_signal(t_kin, cfg.fs, 0.5, 3.0, 8, rng);
        for (int t = 0; t < t_kin; ++t) {
          row[t] = wander[static_cast<std::size_t>(t)];
          kin_min[a] = std::min(kin_min[a], row[t]);
          kin_max[a] = std::max(kin_max[a], row[t]);
        }
      }
    }
    pending.push_back(std::move(pt));
  }

  // One session-wide affine per axis into [0,1]: the same map the scaling
  // stage will later recover, so scaled targets remain a single linear
  // function of the EEG across all trials.
  for (auto& pt : pending) {
    const int t_kin = pt.kin.cols();
    for (int a = 0; a < 3; ++a) {
      const double lo = kin_min[a];
      const double range = std::max(kin_max[a] - lo, 1e-12);
      double* row = pt.kin.ptr() + static_cast<std::size_t>(a) * t_kin;
      for (int t = 0; t < t_kin; ++t) row[t] = (row[t] - lo) / range;
    }
  }

  std::filesystem::create_directories(out_dir);
  for (auto& pt : pending) {
    write_trial_data(out_dir, pt.entry, pt.eeg, pt.kin);
    manifest.trials.push_back(pt.entry);
  }
  write_manifest(out_dir, manifest);
  return manifest;
}

namespace {

LinearBaselineResult fit_and_score(const LaggedDataset& train, const LaggedDataset& val) {
  const long s_train = train.n_samples();
  const long width = train.inputs.numel() / std::max<long>(s_train, 1);
  const long f = width + 1;  // bias column

  Eigen::MatrixXd x(s_train, f);
  Eigen::MatrixXd y(s_train, 3);
  for (long r = 0; r < s_train; ++r) {
    for (long c = 0; c < width; ++c) {
      x(r, c) = train.inputs.data[static_cast<std::size_t>(r * width + c)];
    }
    x(r, width) = 1.0;
    for (int a = 0; a < 3; ++a) y(r, a) = train.targets.at(static_cast<int>(r), a);
  }
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::MatrixXd xty = x.transpose() * y;

  LinearBaselineResult result;
  Eigen::MatrixXd w = xtx.ldlt().solve(xty);
  const double rel_residual =
      (xtx * w - xty).norm() / std::max(xty.norm(), 1e-300);
  if (!w.allFinite() || rel_residual > 1e-6) {
    Eigen::MatrixXd ridge = xtx;
    for (long i = 0; i < f; ++i) ridge(i, i) += 1e-6;
    w = ridge.ldlt().solve(xty);
    result.used_ridge = true;
  }

  const long s_val = val.n_samples();
  Tensor pred({static_cast<int>(s_val), 3});
  for (long r = 0; r < s_val; ++r) {
    for (int a = 0; a < 3; ++a) {
      double acc = w(width, a);
      for (long c = 0; c < width; ++c) {
        acc += val.inputs.data[static_cast<std::size_t>(r * width + c)] * w(c, a);
      }
      pred.at(static_cast<int>(r), a) = acc;
    }
  }
  result.val = metrics_3d(pred, val.targets);
  return result;
}

}  // namespace

LinearBaselineResult linear_baseline_on(const LaggedDataset& train,
                                        const LaggedDataset& val) {
  if (train.n_samples() < 2 || val.n_samples() < 2) {
    throw Error(ErrorKind::EmptyInput, "baseline needs non-empty train and val splits");
  }
  return fit_and_score(train, val);
}

LinearBaselineResult linear_baseline(const LaggedDataset& full_dataset,
                                     const SplitRatios& ratios, std::uint64_t seed) {
  const DatasetSplit split = split_dataset(full_dataset, ratios, seed);
  return linear_baseline_on(split.train, split.val);
}

}  // namespace nk
