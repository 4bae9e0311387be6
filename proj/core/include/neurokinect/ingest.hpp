#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "neurokinect/tensor.hpp"

namespace nk {

// One trial's entry in the session manifest. Sample indices are at the
// session's source rate and refer to positions in the trial's EEG file.
struct TrialEntry {
  std::string trial_id;
  std::string eeg_path;
  std::string kin_path;
  long led_onset_sample = 0;
  long movement_start_sample = 0;
  long movement_stop_sample = 0;
};

struct SessionManifest {
  std::string subject_id;
  double sample_rate_hz = 0.0;
  int n_channels = 0;
  std::vector<TrialEntry> trials;
  std::filesystem::path root;  // directory the manifest was loaded from

  const TrialEntry& entry(const std::string& trial_id) const;  // throws UnknownTrial
};

// One loaded trial: EEG covers the full recording (at least up to
// movement_stop_sample), kinematics cover [movement_start, movement_stop).
struct TrialRecord {
  std::string trial_id;
  Tensor eeg;  // n_channels x T_raw
  Tensor kin;  // 3 x T_kin
  long led_onset_sample = 0;
  long movement_start_sample = 0;
  long movement_stop_sample = 0;
  double response_time_s = 0.0;
};

// Reads and validates manifest.json (schema in docs/formats.md). Checks the
// structural invariants and that every referenced file exists.
SessionManifest load_manifest(const std::filesystem::path& path);

// Loads one trial's EEG and kinematic CSVs, validating shapes and finiteness.
TrialRecord load_trial(const SessionManifest& manifest, const std::string& trial_id);

// Export helpers (used by the synthetic generator and for round-trip tests).
// Numbers are written in shortest round-trip form, so write + load preserves
// them bit-exactly.
void write_manifest(const std::filesystem::path& dir, const SessionManifest& manifest);
void write_trial_data(const std::filesystem::path& dir, const TrialEntry& entry,
                      const Tensor& eeg, const Tensor& kin);

}  // namespace nk
