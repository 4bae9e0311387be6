#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "neurokinect/dataset.hpp"
#include "neurokinect/erp.hpp"
#include "neurokinect/ingest.hpp"
#include "neurokinect/metrics.hpp"
#include "neurokinect/preprocess.hpp"
#include "neurokinect/qc.hpp"
#include "neurokinect/train.hpp"

namespace nk {

struct PreprocessConfig {
  double fs_out_hz = 25.0;
  FilterSpec filter;
  AntiAlias antialias = AntiAlias::On;
};

// One trial after conditioning: signals at fs_out, EEG cut to [cue,
// movement stop) and kinematics spanning [movement start, movement stop).
struct ProcessedTrial {
  std::string trial_id;
  Tensor eeg;  // channels x T_cut; cue at index 0
  Tensor kin;  // 3 x T_kin
  double response_time_s = 0.0;
};

// Conditioning order: decimate -> DC removal -> band-pass on the full
// recording (so filter transients fall into the recording's padding), then
// the cue-to-stop cut. Standardization happens later at session level.
ProcessedTrial preprocess_trial(const TrialRecord& record, double fs_in,
                                const PreprocessConfig& cfg);

// A conditioned session ready for windowing: QC-surviving trials with
// standardized EEG and scaled kinematics. Channel statistics and the
// kinematic scaler are computed over the trials' concatenation, matching the
// trial-matrix concatenation the decoding stage trains on; a single session
// map also keeps targets a consistent function of the EEG across trials.
struct SessionData {
  std::vector<ProcessedTrial> trials;  // kept trials only
  ChannelStats stats;
  ScalerParams scaler;
  QcReport qc;
  double fs_out = 0.0;
};

SessionData preprocess_session(const SessionManifest& manifest,
                               const PreprocessConfig& cfg,
                               const QcConfig* qc_cfg);  // null: QC skipped

LaggedDataset make_dataset(const SessionData& session, const WindowConfig& cfg);

// ERP path: epoch every trial of each session around the cue at the source
// rate (or decimated first when fs_epoch < source rate), band-pass,
// baseline-correct, then average. Sessions whose kept-trial fraction falls
// below min_kept_fraction are dropped from the grand average.
struct ErpConfig {
  EpochWindow window;
  FilterSpec filter{.design = FilterMode::ZeroPhase};
  double fs_epoch_hz = 0.0;  // 0: source rate
  double min_kept_fraction = 0.6;
  std::vector<int> exclude_channels;  // 1-based indices, e.g. noisy frontals
  std::optional<QcConfig> qc;         // used for the kept fraction
};

ErpResult run_erp(const std::vector<SessionManifest>& sessions, const ErpConfig& cfg);

// Artifact writers (formats in docs/formats.md).
void write_qc_report_csv(const std::filesystem::path& path, const QcReport& report);
void write_train_report_csv(const std::filesystem::path& path, const TrainReport& report);
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, MetricsReport>>& rows);
void write_predictions_csv(const std::filesystem::path& path, const Tensor& predicted,
                           const Tensor& measured, const ScalerParams& scaler,
                           const LaggedDataset& ds);
void write_erp_csv(const std::filesystem::path& path, const ErpResult& erp, double fs,
                   const EpochWindow& window);

}  // namespace nk
