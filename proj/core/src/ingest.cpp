#include "neurokinect/ingest.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "neurokinect/csv.hpp"
#include "neurokinect/errors.hpp"

namespace nk {

using nlohmann::json;

const TrialEntry& SessionManifest::entry(const std::string& trial_id) const {
  for (const auto& t : trials) {
    if (t.trial_id == trial_id) return t;
  }
  throw Error(ErrorKind::UnknownTrial, "trial '" + trial_id + "' not in manifest");
}

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw Error(ErrorKind::SchemaViolation,
                  where + ": unknown field '" + it.key() + "'");
    }
  }
}

template <typename T>
T require_field(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) {
    throw Error(ErrorKind::SchemaViolation, where + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::SchemaViolation, where + ": field '" + key + "' has wrong type");
  }
}

// Parses a trial CSV into a channels x time matrix, validating the expected
// header and that every value is finite.
Tensor read_signal_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& expected_columns,
                       const std::string& trial_id) {
  const CsvTable table = read_csv(path);
  if (table.header.size() != expected_columns.size() + 1 ||
      table.header[0] != "sample_index") {
    throw Error(ErrorKind::CorruptData,
                trial_id + ": " + path.string() + " has unexpected header");
  }
  for (std::size_t i = 0; i < expected_columns.size(); ++i) {
    if (table.header[i + 1] != expected_columns[i]) {
      throw Error(ErrorKind::CorruptData,
                  trial_id + ": expected column '" + expected_columns[i] +
                      "', found '" + table.header[i + 1] + "'");
    }
  }
  const int channels = static_cast<int>(expected_columns.size());
  const int t_len = static_cast<int>(table.rows.size());
  if (t_len == 0) {
    throw Error(ErrorKind::CorruptData, trial_id + ": " + path.string() + " has no samples");
  }
  Tensor out({channels, t_len});
  for (int t = 0; t < t_len; ++t) {
    const auto& row = table.rows[static_cast<std::size_t>(t)];
    for (int ch = 0; ch < channels; ++ch) {
      const double v = parse_double(row[static_cast<std::size_t>(ch) + 1]);
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::CorruptData,
                    trial_id + ": non-finite value at sample " + std::to_string(t) +
                        ", column " + std::to_string(ch + 1));
      }
      out.at(ch, t) = v;
    }
  }
  return out;
}

std::vector<std::string> channel_columns(int n) {
  std::vector<std::string> cols;
  cols.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) cols.push_back("ch_" + std::to_string(i));
  return cols;
}

}  // namespace

SessionManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "cannot open manifest " + path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaViolation, "manifest parse error: " + std::string(e.what()));
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::SchemaViolation, "manifest must be a JSON object");
  }
  reject_unknown_keys(doc, {"subject_id", "sample_rate_hz", "n_channels", "trials"},
                      "manifest");

  SessionManifest m;
  m.root = path.parent_path();
  m.subject_id = require_field<std::string>(doc, "subject_id", "manifest");
  m.sample_rate_hz = require_field<double>(doc, "sample_rate_hz", "manifest");
  m.n_channels = require_field<int>(doc, "n_channels", "manifest");
  if (!(m.sample_rate_hz > 0.0)) {
    throw Error(ErrorKind::SchemaViolation, "manifest: sample_rate_hz must be positive");
  }
  if (m.n_channels < 1) {
    throw Error(ErrorKind::SchemaViolation, "manifest: n_channels must be >= 1");
  }
  if (!doc.contains("trials") || !doc.at("trials").is_array()) {
    throw Error(ErrorKind::SchemaViolation, "manifest: missing 'trials' array");
  }
  std::set<std::string> seen_ids;
  for (const auto& t : doc.at("trials")) {
    const std::string where = "manifest trial " + std::to_string(m.trials.size());
    if (!t.is_object()) throw Error(ErrorKind::SchemaViolation, where + ": not an object");
    reject_unknown_keys(t,
                        {"trial_id", "eeg_path", "kin_path", "led_onset_sample",
                         "movement_start_sample", "movement_stop_sample"},
                        where);
    TrialEntry e;
    e.trial_id = require_field<std::string>(t, "trial_id", where);
    e.eeg_path = require_field<std::string>(t, "eeg_path", where);
    e.kin_path = require_field<std::string>(t, "kin_path", where);
    e.led_onset_sample = require_field<long>(t, "led_onset_sample", where);
    e.movement_start_sample = require_field<long>(t, "movement_start_sample", where);
    e.movement_stop_sample = require_field<long>(t, "movement_stop_sample", where);
    if (!seen_ids.insert(e.trial_id).second) {
      throw Error(ErrorKind::SchemaViolation, where + ": duplicate trial_id '" + e.trial_id + "'");
    }
    if (e.led_onset_sample < 0) {
      throw Error(ErrorKind::InconsistentTiming, e.trial_id + ": led_onset_sample < 0");
    }
    if (e.movement_start_sample < e.led_onset_sample) {
      throw Error(ErrorKind::InconsistentTiming,
                  e.trial_id + ": movement_start_sample before led_onset_sample");
    }
    if (e.movement_stop_sample <= e.movement_start_sample) {
      throw Error(ErrorKind::InconsistentTiming,
                  e.trial_id + ": movement_stop_sample not after movement_start_sample");
    }
    for (const auto& rel : {e.eeg_path, e.kin_path}) {
      if (!std::filesystem::exists(m.root / rel)) {
        throw Error(ErrorKind::MissingFile, e.trial_id + ": missing data file " + rel);
      }
    }
    m.trials.push_back(std::move(e));
  }
  return m;
}

TrialRecord load_trial(const SessionManifest& manifest, const std::string& trial_id) {
  const TrialEntry& e = manifest.entry(trial_id);
  TrialRecord rec;
  rec.trial_id = e.trial_id;
  rec.led_onset_sample = e.led_onset_sample;
  rec.movement_start_sample = e.movement_start_sample;
  rec.movement_stop_sample = e.movement_stop_sample;
  rec.response_time_s =
      static_cast<double>(e.movement_start_sample - e.led_onset_sample) /
      manifest.sample_rate_hz;
  rec.eeg = read_signal_csv(manifest.root / e.eeg_path,
                            channel_columns(manifest.n_channels), trial_id);
  rec.kin = read_signal_csv(manifest.root / e.kin_path, {"x", "y", "z"}, trial_id);
  if (rec.eeg.cols() < e.movement_stop_sample) {
    throw Error(ErrorKind::CorruptData,
                trial_id + ": EEG has " + std::to_string(rec.eeg.cols()) +
                    " samples, movement_stop is " + std::to_string(e.movement_stop_sample));
  }
  return rec;
}

void write_manifest(const std::filesystem::path& dir, const SessionManifest& manifest) {
  std::filesystem::create_directories(dir);
  json doc;
  doc["subject_id"] = manifest.subject_id;
  doc["sample_rate_hz"] = manifest.sample_rate_hz;
  doc["n_channels"] = manifest.n_channels;
  doc["trials"] = json::array();
  for (const auto& e : manifest.trials) {
    doc["trials"].push_back({{"trial_id", e.trial_id},
                             {"eeg_path", e.eeg_path},
                             {"kin_path", e.kin_path},
                             {"led_onset_sample", e.led_onset_sample},
                             {"movement_start_sample", e.movement_start_sample},
                             {"movement_stop_sample", e.movement_stop_sample}});
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write manifest in " + dir.string());
  }
  out << doc.dump(2) << '\n';
}

void write_trial_data(const std::filesystem::path& dir, const TrialEntry& entry,
                      const Tensor& eeg, const Tensor& kin) {
  std::filesystem::create_directories(dir);
  {
    CsvTable table;
    table.header.push_back("sample_index");
    for (int ch = 1; ch <= eeg.rows(); ++ch) table.header.push_back("ch_" + std::to_string(ch));
    table.rows.reserve(static_cast<std::size_t>(eeg.cols()));
    for (int t = 0; t < eeg.cols(); ++t) {
      std::vector<std::string> row;
      row.reserve(static_cast<std::size_t>(eeg.rows()) + 1);
      row.push_back(std::to_string(t));
      for (int ch = 0; ch < eeg.rows(); ++ch) row.push_back(format_double(eeg.at(ch, t)));
      table.rows.push_back(std::move(row));
    }
    write_csv(dir / entry.eeg_path, table);
  }
  {
    CsvTable table;
    table.header = {"sample_index", "x", "y", "z"};
    table.rows.reserve(static_cast<std::size_t>(kin.cols()));
    for (int t = 0; t < kin.cols(); ++t) {
      table.rows.push_back({std::to_string(t), format_double(kin.at(0, t)),
                            format_double(kin.at(1, t)), format_double(kin.at(2, t))});
    }
    write_csv(dir / entry.kin_path, table);
  }
}

}  // namespace nk
