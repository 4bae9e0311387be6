#include <doctest.h>

#include <fstream>

#include "neurokinect/errors.hpp"
#include "neurokinect/ingest.hpp"
#include "neurokinect/rng.hpp"
#include "test_util.hpp"

using namespace nk;

namespace {

// Writes a small valid session and returns its directory.
std::filesystem::path write_session(int n_trials, int n_channels, int t_len,
                                    const std::string& tag) {
  const auto dir = nktest::scratch_dir("ingest_" + tag);
  SessionManifest m;
  m.subject_id = "S1";
  m.sample_rate_hz = 500.0;
  m.n_channels = n_channels;
  Rng rng(1);
  for (int k = 0; k < n_trials; ++k) {
    TrialEntry e;
    e.trial_id = "t" + std::to_string(k);
    e.eeg_path = e.trial_id + "_eeg.csv";
    e.kin_path = e.trial_id + "_kin.csv";
    e.led_onset_sample = 1000;
    e.movement_start_sample = 1180;
    e.movement_stop_sample = t_len - 100;
    Tensor eeg({n_channels, t_len});
    for (auto& v : eeg.data) v = rng.gaussian();
    Tensor kin({3, t_len - 100 - 1180});
    for (auto& v : kin.data) v = rng.gaussian();
    write_trial_data(dir, e, eeg, kin);
    m.trials.push_back(e);
  }
  write_manifest(dir, m);
  return dir;
}

}  // namespace

TEST_CASE("manifest round trip with the full trial count") {
  const auto dir = write_session(294, 4, 2500, "full");
  const SessionManifest m = load_manifest(dir / "manifest.json");
  CHECK(m.trials.size() == 294);
  CHECK(m.n_channels == 4);
  CHECK(m.sample_rate_hz == 500.0);
}

TEST_CASE("schema violations are named") {
  const auto dir = nktest::scratch_dir("ingest_schema");
  {
    std::ofstream out(dir / "manifest.json");
    out << R"({"subject_id":"x","sample_rate_hz":500,"n_channels":0,"trials":[]})";
  }
  try {
    (void)load_manifest(dir / "manifest.json");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SchemaViolation);
    CHECK(std::string(e.what()).find("n_channels") != std::string::npos);
  }
  {
    std::ofstream out(dir / "manifest.json");
    out << R"({"subject_id":"x","sample_rate_hz":500,"n_channels":2,"wat":1,"trials":[]})";
  }
  CHECK_THROWS_AS((void)load_manifest(dir / "manifest.json"), Error);
}

TEST_CASE("movement stop before start raises InconsistentTiming") {
  const auto dir = write_session(1, 2, 2500, "timing");
  // rewrite the manifest with swapped timing
  SessionManifest m = load_manifest(dir / "manifest.json");
  m.trials[0].movement_stop_sample = m.trials[0].movement_start_sample - 1;
  write_manifest(dir, m);
  try {
    (void)load_manifest(dir / "manifest.json");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InconsistentTiming);
  }
}

TEST_CASE("missing data file raises MissingFile") {
  const auto dir = write_session(2, 2, 2500, "missing");
  std::filesystem::remove(dir / "t1_eeg.csv");
  CHECK_THROWS_AS((void)load_manifest(dir / "manifest.json"), Error);
}

TEST_CASE("response time is computed from the sample clock") {
  const auto dir = write_session(1, 2, 2500, "rt");
  const SessionManifest m = load_manifest(dir / "manifest.json");
  const TrialRecord rec = load_trial(m, "t0");
  // led 1000, start 1180, fs 500 -> 0.36 s
  CHECK(rec.response_time_s == doctest::Approx(0.36));
}

TEST_CASE("unknown trial raises UnknownTrial") {
  const auto dir = write_session(1, 2, 2500, "unknown");
  const SessionManifest m = load_manifest(dir / "manifest.json");
  CHECK_THROWS_AS((void)load_trial(m, "nope"), Error);
}

TEST_CASE("NaN cells and shape mismatches raise CorruptData") {
  const auto dir = write_session(1, 3, 2500, "nan");
  const SessionManifest m = load_manifest(dir / "manifest.json");
  {
    // poison one EEG cell
    auto path = dir / "t0_eeg.csv";
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    in.close();
    const auto pos = text.find('\n', text.find('\n') + 1);
    const auto comma = text.find(',', pos);
    const auto comma2 = text.find(',', comma + 1);
    text.replace(comma + 1, comma2 - comma - 1, "nan");
    std::ofstream out(path);
    out << text;
  }
  try {
    (void)load_trial(m, "t0");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CorruptData);
  }
}

TEST_CASE("EEG with fewer rows than n_channels is rejected") {
  const auto dir = write_session(1, 3, 2500, "rows");
  // Re-declare the session as 4 channels; the 3-channel files no longer match.
  SessionManifest m = load_manifest(dir / "manifest.json");
  m.n_channels = 4;
  write_manifest(dir, m);
  const SessionManifest m2 = load_manifest(dir / "manifest.json");
  try {
    (void)load_trial(m2, "t0");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CorruptData);
  }
}

TEST_CASE("trial data round-trips bit-exactly through CSV") {
  const auto dir = nktest::scratch_dir("ingest_roundtrip");
  Rng rng(9);
  Tensor eeg({3, 500});
  for (auto& v : eeg.data) v = rng.gaussian() * 1e-7 + rng.gaussian();
  Tensor kin({3, 300});
  for (auto& v : kin.data) v = rng.gaussian() * 123.456;
  TrialEntry e;
  e.trial_id = "t0";
  e.eeg_path = "t0_eeg.csv";
  e.kin_path = "t0_kin.csv";
  e.led_onset_sample = 50;
  e.movement_start_sample = 100;
  e.movement_stop_sample = 400;
  write_trial_data(dir, e, eeg, kin);
  SessionManifest m;
  m.subject_id = "S";
  m.sample_rate_hz = 500;
  m.n_channels = 3;
  m.trials.push_back(e);
  write_manifest(dir, m);
  const SessionManifest loaded = load_manifest(dir / "manifest.json");
  const TrialRecord rec = load_trial(loaded, "t0");
  CHECK(rec.eeg.data == eeg.data);  // bit-identical
  CHECK(rec.kin.data == kin.data);
  const TrialRecord rec2 = load_trial(loaded, "t0");
  CHECK(rec2.eeg.data == rec.eeg.data);
}
