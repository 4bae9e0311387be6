#include "neurokinect/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "neurokinect/csv.hpp"
#include "neurokinect/errors.hpp"

namespace nk {

namespace {

int decimation_factor(double fs_in, double fs_out) {
  const double ratio = fs_in / fs_out;
  const int factor = static_cast<int>(std::lround(ratio));
  if (factor < 1 || std::abs(ratio - factor) > 1e-9) {
    throw Error(ErrorKind::InvalidConfig,
                "fs_out " + std::to_string(fs_out) + " must divide fs " +
                    std::to_string(fs_in) + " evenly");
  }
  return factor;
}

}  // namespace

ProcessedTrial preprocess_trial(const TrialRecord& record, double fs_in,
                                const PreprocessConfig& cfg) {
  const int factor = decimation_factor(fs_in, cfg.fs_out_hz);

  Tensor eeg = decimate(record.eeg, factor, cfg.antialias);
  eeg = remove_dc(eeg);
  eeg = bandpass_aligned(eeg, cfg.filter, cfg.fs_out_hz);

  const long led_out = record.led_onset_sample / factor;
  const long stop_out = led_out + (record.movement_stop_sample - record.led_onset_sample) / factor;
  if (stop_out > eeg.cols()) {
    throw Error(ErrorKind::CorruptData,
                record.trial_id + ": movement stop beyond decimated recording");
  }
  const int t_cut = static_cast<int>(stop_out - led_out);
  Tensor cut({eeg.rows(), t_cut});
  for (int ch = 0; ch < eeg.rows(); ++ch) {
    const double* src = eeg.ptr() + static_cast<std::size_t>(ch) * eeg.cols() + led_out;
    std::copy(src, src + t_cut, cut.ptr() + static_cast<std::size_t>(ch) * t_cut);
  }

  ProcessedTrial out;
  out.trial_id = record.trial_id;
  out.eeg = std::move(cut);
  out.kin = decimate(record.kin, factor, cfg.antialias);
  out.response_time_s = record.response_time_s;
  return out;
}

SessionData preprocess_session(const SessionManifest& manifest,
                               const PreprocessConfig& cfg, const QcConfig* qc_cfg) {
  if (manifest.trials.empty()) {
    throw Error(ErrorKind::EmptyInput, "session has no trials");
  }
  std::vector<ProcessedTrial> processed;
  processed.reserve(manifest.trials.size());
  for (const auto& entry : manifest.trials) {
    const TrialRecord record = load_trial(manifest, entry.trial_id);
    processed.push_back(preprocess_trial(record, manifest.sample_rate_hz, cfg));
  }

  SessionData session;
  session.fs_out = cfg.fs_out_hz;

  if (qc_cfg) {
    std::vector<QcTrialInput> qc_in;
    qc_in.reserve(processed.size());
    for (const auto& t : processed) {
      qc_in.push_back(QcTrialInput{t.trial_id, &t.eeg, 0, t.response_time_s});
    }
    session.qc = flag_bad_trials(qc_in, cfg.fs_out_hz, *qc_cfg);
  } else {
    for (const auto& t : processed) {
      session.qc.trials.push_back(
          QcTrialResult{t.trial_id, QcVerdict::Kept, t.response_time_s, 0.0, ""});
    }
  }

  for (std::size_t k = 0; k < processed.size(); ++k) {
    if (session.qc.trials[k].verdict != QcVerdict::Kept) continue;
    auto [eeg, kin] = align_lengths(processed[k].eeg, processed[k].kin);
    processed[k].eeg = std::move(eeg);
    processed[k].kin = std::move(kin);
    session.trials.push_back(std::move(processed[k]));
  }
  if (session.trials.empty()) {
    throw Error(ErrorKind::EmptyInput, "quality control rejected every trial");
  }

  // Session-level statistics over the trial concatenation.
  const int channels = session.trials[0].eeg.rows();
  long total = 0;
  for (const auto& t : session.trials) total += t.eeg.cols();
  Tensor eeg_cat({channels, static_cast<int>(total)});
  Tensor kin_cat({3, static_cast<int>(total)});
  long at = 0;
  for (const auto& t : session.trials) {
    const int len = t.eeg.cols();
    for (int ch = 0; ch < channels; ++ch) {
      std::copy(t.eeg.ptr() + static_cast<std::size_t>(ch) * len,
                t.eeg.ptr() + static_cast<std::size_t>(ch) * len + len,
                eeg_cat.ptr() + static_cast<std::size_t>(ch) * total + at);
    }
    for (int a = 0; a < 3; ++a) {
      std::copy(t.kin.ptr() + static_cast<std::size_t>(a) * len,
                t.kin.ptr() + static_cast<std::size_t>(a) * len + len,
                kin_cat.ptr() + static_cast<std::size_t>(a) * total + at);
    }
    at += len;
  }
  session.stats = standardize(eeg_cat).second;
  session.scaler = scale_kinematics(kin_cat).second;

  for (auto& t : session.trials) {
    const int len = t.eeg.cols();
    for (int ch = 0; ch < channels; ++ch) {
      const double mu = session.stats.mu[static_cast<std::size_t>(ch)];
      const double inv = 1.0 / session.stats.sigma[static_cast<std::size_t>(ch)];
      double* row = t.eeg.ptr() + static_cast<std::size_t>(ch) * len;
      for (int i = 0; i < len; ++i) row[i] = (row[i] - mu) * inv;
    }
    for (int a = 0; a < 3; ++a) {
      const double lo = session.scaler.ax_min[static_cast<std::size_t>(a)];
      const double inv = 1.0 / (session.scaler.ax_max[static_cast<std::size_t>(a)] - lo);
      double* row = t.kin.ptr() + static_cast<std::size_t>(a) * len;
      for (int i = 0; i < len; ++i) row[i] = (row[i] - lo) * inv;
    }
  }
  return session;
}

LaggedDataset make_dataset(const SessionData& session, const WindowConfig& cfg) {
  std::vector<TrialSignals> signals;
  signals.reserve(session.trials.size());
  for (const auto& t : session.trials) {
    signals.push_back(TrialSignals{t.trial_id, &t.eeg, &t.kin});
  }
  return build_dataset(signals, cfg);
}

ErpResult run_erp(const std::vector<SessionManifest>& sessions, const ErpConfig& cfg) {
  if (sessions.empty()) throw Error(ErrorKind::EmptyInput, "no sessions for ERP");
  std::vector<std::string> ids;
  std::vector<Epochs> all_epochs;
  for (const auto& manifest : sessions) {
    const double fs_src = manifest.sample_rate_hz;
    const double fs = cfg.fs_epoch_hz > 0.0 ? cfg.fs_epoch_hz : fs_src;
    const int factor = decimation_factor(fs_src, fs);

    std::vector<TrialRecord> records;
    records.reserve(manifest.trials.size());
    for (const auto& entry : manifest.trials) {
      records.push_back(load_trial(manifest, entry.trial_id));
    }

    if (cfg.qc) {
      // Kept fraction by the response-time rule; sessions dominated by slow
      // responses carry too little cue-locked signal to average.
      std::size_t kept = 0;
      for (const auto& r : records) {
        if (r.response_time_s <= cfg.qc->rt_limit_s) ++kept;
      }
      if (static_cast<double>(kept) <
          cfg.min_kept_fraction * static_cast<double>(records.size())) {
        continue;
      }
    }

    std::set<int> excluded(cfg.exclude_channels.begin(), cfg.exclude_channels.end());
    std::vector<Tensor> prepared;
    std::vector<EpochInput> inputs;
    prepared.reserve(records.size());
    for (const auto& r : records) {
      Tensor eeg = factor > 1 ? decimate(r.eeg, factor) : r.eeg;
      if (!excluded.empty()) {
        Tensor kept_rows({eeg.rows() - static_cast<int>(excluded.size()), eeg.cols()});
        int at = 0;
        for (int ch = 0; ch < eeg.rows(); ++ch) {
          if (excluded.count(ch + 1)) continue;
          std::copy(eeg.ptr() + static_cast<std::size_t>(ch) * eeg.cols(),
                    eeg.ptr() + static_cast<std::size_t>(ch + 1) * eeg.cols(),
                    kept_rows.ptr() + static_cast<std::size_t>(at) * eeg.cols());
          ++at;
        }
        eeg = std::move(kept_rows);
      }
      prepared.push_back(std::move(eeg));
      inputs.push_back(EpochInput{r.trial_id, nullptr, r.led_onset_sample / factor});
    }
    for (std::size_t i = 0; i < prepared.size(); ++i) inputs[i].eeg = &prepared[i];

    Epochs ep = epoch_trials(inputs, fs, cfg.window, cfg.filter);
    all_epochs.push_back(baseline_correct(ep));
    ids.push_back(manifest.subject_id);
  }
  if (all_epochs.empty()) {
    throw Error(ErrorKind::EmptyInput, "every session fell below the kept-trial fraction");
  }
  std::vector<const Epochs*> ptrs;
  ptrs.reserve(all_epochs.size());
  for (const auto& e : all_epochs) ptrs.push_back(&e);
  return erp_averages(ids, ptrs);
}

void write_qc_report_csv(const std::filesystem::path& path, const QcReport& report) {
  CsvTable table;
  table.header = {"trial_id", "verdict", "response_time_s", "rmse"};
  for (const auto& t : report.trials) {
    table.rows.push_back({t.trial_id, to_string(t.verdict),
                          format_double(t.response_time_s),
                          std::isnan(t.rmse) ? "" : format_double(t.rmse)});
  }
  write_csv(path, table);
}

void write_train_report_csv(const std::filesystem::path& path, const TrainReport& report) {
  CsvTable table;
  table.header = {"epoch", "loss_total", "loss_corr", "loss_err", "loss_var",
                  "val_rho_x", "val_rho_y", "val_rho_z", "val_rho_3d",
                  "val_mse_x", "val_mse_y", "val_mse_z", "val_mse_3d",
                  "checkpoint"};
  for (const auto& e : report.epochs) {
    table.rows.push_back({std::to_string(e.epoch), format_double(e.train_loss.total),
                          format_double(e.train_loss.term1), format_double(e.train_loss.term2),
                          format_double(e.train_loss.term3), format_double(e.val.rho_x),
                          format_double(e.val.rho_y), format_double(e.val.rho_z),
                          format_double(e.val.rho_3d), format_double(e.val.mse_x),
                          format_double(e.val.mse_y), format_double(e.val.mse_z),
                          format_double(e.val.mse_3d), e.checkpoint_taken ? "1" : "0"});
  }
  write_csv(path, table);
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  CsvTable table;
  table.header = {"split", "rho_x", "rho_y", "rho_z", "rho_3d",
                  "mse_x", "mse_y", "mse_z", "mse_3d", "n_samples"};
  for (const auto& [name, m] : rows) {
    table.rows.push_back({name, format_double(m.rho_x), format_double(m.rho_y),
                          format_double(m.rho_z), format_double(m.rho_3d),
                          format_double(m.mse_x), format_double(m.mse_y),
                          format_double(m.mse_z), format_double(m.mse_3d),
                          std::to_string(m.n_samples)});
  }
  write_csv(path, table);
}

void write_predictions_csv(const std::filesystem::path& path, const Tensor& predicted,
                           const Tensor& measured, const ScalerParams& scaler,
                           const LaggedDataset& ds) {
  CsvTable table;
  table.header = {"sample", "trial_id",
                  "measured_x", "measured_y", "measured_z",
                  "predicted_x", "predicted_y", "predicted_z",
                  "measured_raw_x", "measured_raw_y", "measured_raw_z",
                  "predicted_raw_x", "predicted_raw_y", "predicted_raw_z"};
  const int s = predicted.rows();
  for (int r = 0; r < s; ++r) {
    std::vector<std::string> row;
    row.push_back(std::to_string(r));
    row.push_back(ds.trial_ids[static_cast<std::size_t>(
        ds.provenance[static_cast<std::size_t>(r)].trial_index)]);
    for (int a = 0; a < 3; ++a) row.push_back(format_double(measured.at(r, a)));
    for (int a = 0; a < 3; ++a) row.push_back(format_double(predicted.at(r, a)));
    for (int a = 0; a < 3; ++a) {
      const double lo = scaler.ax_min[static_cast<std::size_t>(a)];
      const double range = scaler.ax_max[static_cast<std::size_t>(a)] - lo;
      row.push_back(format_double(measured.at(r, a) * range + lo));
    }
    for (int a = 0; a < 3; ++a) {
      const double lo = scaler.ax_min[static_cast<std::size_t>(a)];
      const double range = scaler.ax_max[static_cast<std::size_t>(a)] - lo;
      row.push_back(format_double(predicted.at(r, a) * range + lo));
    }
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

void write_erp_csv(const std::filesystem::path& path, const ErpResult& erp, double fs,
                   const EpochWindow& window) {
  CsvTable table;
  const int channels = erp.grand_average.rows();
  const int t_epoch = erp.grand_average.cols();
  table.header.push_back("time_ms");
  for (int ch = 1; ch <= channels; ++ch) table.header.push_back("ch_" + std::to_string(ch));
  table.header.push_back("erp_trace");
  for (int t = 0; t < t_epoch; ++t) {
    std::vector<std::string> row;
    const double time_ms = -window.pre_ms + 1000.0 * static_cast<double>(t) / fs;
    row.push_back(format_double(time_ms));
    for (int ch = 0; ch < channels; ++ch) {
      row.push_back(format_double(erp.grand_average.at(ch, t)));
    }
    row.push_back(format_double(erp.erp_trace[static_cast<std::size_t>(t)]));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

}  // namespace nk
