#include <doctest.h>

#include <set>

#include "neurokinect/dataset.hpp"
#include "neurokinect/errors.hpp"
#include "neurokinect/rng.hpp"
#include "test_util.hpp"

using namespace nk;

namespace {

Tensor iota_eeg(int n, int t_len) {
  Tensor m({n, t_len});
  for (int ch = 0; ch < n; ++ch) {
    for (int t = 0; t < t_len; ++t) m.at(ch, t) = 100.0 * ch + t;
  }
  return m;
}

Tensor iota_kin(int t_len) {
  Tensor m({3, t_len});
  for (int a = 0; a < 3; ++a) {
    for (int t = 0; t < t_len; ++t) m.at(a, t) = 1000.0 * a + t;
  }
  return m;
}

}  // namespace

TEST_CASE("tiny window example: N=2, T=5, l=2, d=0") {
  const Tensor eeg = iota_eeg(2, 5);
  const Tensor kin = iota_kin(5);
  WindowConfig cfg;
  cfg.lags = 2;
  cfg.transfer_delay = 0;
  cfg.layout = WindowLayout::Flattened;
  const LaggedDataset ds = build_windows(eeg, kin, cfg);
  CHECK(ds.n_samples() == 3);
  // sample 0 flattened: newest frame (t=2) first, then t=1, t=0
  const double* in0 = ds.inputs.ptr();
  CHECK(in0[0] == eeg.at(0, 2));
  CHECK(in0[1] == eeg.at(1, 2));
  CHECK(in0[2] == eeg.at(0, 1));
  CHECK(in0[3] == eeg.at(1, 1));
  CHECK(in0[4] == eeg.at(0, 0));
  CHECK(in0[5] == eeg.at(1, 0));
  CHECK(ds.targets.at(0, 0) == kin.at(0, 2));
  CHECK(ds.targets.at(0, 2) == kin.at(2, 2));
}

TEST_CASE("l=0, d=0 is the identity pairing") {
  const Tensor eeg = iota_eeg(3, 7);
  const Tensor kin = iota_kin(7);
  WindowConfig cfg;
  cfg.lags = 0;
  cfg.transfer_delay = 0;
  const LaggedDataset ds = build_windows(eeg, kin, cfg);
  CHECK(ds.n_samples() == 7);
  for (int s = 0; s < 7; ++s) {
    for (int ch = 0; ch < 3; ++ch) {
      CHECK(ds.inputs.data[static_cast<std::size_t>(s * 3 + ch)] == eeg.at(ch, s));
    }
    CHECK(ds.targets.at(s, 1) == kin.at(1, s));
  }
}

TEST_CASE("the standard configuration yields 161 samples of width 352") {
  const Tensor eeg = iota_eeg(32, 175);
  const Tensor kin = iota_kin(175);
  WindowConfig cfg;  // l=10, d=4
  cfg.layout = WindowLayout::Flattened;
  const LaggedDataset ds = build_windows(eeg, kin, cfg);
  CHECK(ds.n_samples() == 161);
  CHECK(ds.inputs.shape == std::vector<int>{161, 352});

  // element traceability against an independent enumeration over (s, i, n)
  long mismatches = 0;
  for (long s = 0; s < ds.n_samples(); ++s) {
    for (int i = 0; i <= cfg.lags; ++i) {
      for (int n = 0; n < 32; ++n) {
        const double got = ds.inputs.data[static_cast<std::size_t>(s * 352 + i * 32 + n)];
        const double want = eeg.at(n, static_cast<int>(s) + cfg.lags - i);
        if (got != want) ++mismatches;
      }
    }
    // no target leakage: target index beyond every input index
    const int target_index = static_cast<int>(s) + cfg.lags + cfg.transfer_delay;
    CHECK(ds.targets.at(static_cast<int>(s), 0) == kin.at(0, target_index));
    CHECK(target_index > static_cast<int>(s) + cfg.lags);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("sequence layout steps run oldest to newest") {
  const Tensor eeg = iota_eeg(2, 6);
  const Tensor kin = iota_kin(6);
  WindowConfig cfg;
  cfg.lags = 2;
  cfg.transfer_delay = 1;
  cfg.layout = WindowLayout::Sequence;
  const LaggedDataset ds = build_windows(eeg, kin, cfg);
  CHECK(ds.n_samples() == 3);
  CHECK(ds.inputs.shape == std::vector<int>{3, 3, 2});
  // sample 1: steps at t = 1, 2, 3
  for (int j = 0; j < 3; ++j) {
    for (int ch = 0; ch < 2; ++ch) {
      CHECK(ds.inputs.data[static_cast<std::size_t>((1 * 3 + j) * 2 + ch)] ==
            eeg.at(ch, 1 + j));
    }
  }
  CHECK(ds.targets.at(1, 0) == kin.at(0, 1 + 2 + 1));
}

TEST_CASE("sample count identity over multiple trials") {
  Rng rng(3);
  WindowConfig cfg;
  std::vector<Tensor> eegs, kins;
  std::vector<TrialSignals> sig;
  long expected = 0;
  for (int k = 0; k < 7; ++k) {
    const int t_len = 20 + static_cast<int>(rng.below(60));
    eegs.push_back(iota_eeg(4, t_len));
    kins.push_back(iota_kin(t_len));
    expected += t_len - cfg.lags - cfg.transfer_delay;
  }
  for (int k = 0; k < 7; ++k) {
    sig.push_back(TrialSignals{"t" + std::to_string(k), &eegs[static_cast<std::size_t>(k)],
                               &kins[static_cast<std::size_t>(k)]});
  }
  const LaggedDataset ds = build_dataset(sig, cfg);
  CHECK(ds.n_samples() == expected);
  // samples never span a trial boundary: every window's start index allows
  // l+d more columns inside its own trial
  for (long s = 0; s < ds.n_samples(); ++s) {
    const auto& p = ds.provenance[static_cast<std::size_t>(s)];
    const int t_len = eegs[static_cast<std::size_t>(p.trial_index)].cols();
    CHECK(p.t + cfg.lags + cfg.transfer_delay < t_len);
  }
}

TEST_CASE("too-short trial raises TrialTooShort") {
  WindowConfig cfg;  // needs T > 14
  CHECK_THROWS_AS((void)build_windows(iota_eeg(2, 14), iota_kin(14), cfg), Error);
}

TEST_CASE("trial-level split is exact, reproducible, and leak-free") {
  WindowConfig cfg;
  cfg.lags = 1;
  cfg.transfer_delay = 0;
  std::vector<Tensor> eegs, kins;
  std::vector<TrialSignals> sig;
  for (int k = 0; k < 10; ++k) {
    eegs.push_back(iota_eeg(2, 30));
    kins.push_back(iota_kin(30));
  }
  for (int k = 0; k < 10; ++k) {
    sig.push_back(TrialSignals{"t" + std::to_string(k), &eegs[static_cast<std::size_t>(k)],
                               &kins[static_cast<std::size_t>(k)]});
  }
  const LaggedDataset ds = build_dataset(sig, cfg);
  const SplitRatios ratios{0.8, 0.1, 0.1};
  const DatasetSplit a = split_dataset(ds, ratios, 7);
  CHECK(a.train.trial_ids.size() == 8);
  CHECK(a.val.trial_ids.size() == 1);
  CHECK(a.test.trial_ids.size() == 1);

  const DatasetSplit b = split_dataset(ds, ratios, 7);
  CHECK(a.train.trial_ids == b.train.trial_ids);
  CHECK(a.val.trial_ids == b.val.trial_ids);
  CHECK(a.test.trial_ids == b.test.trial_ids);
  CHECK(a.train.inputs.data == b.train.inputs.data);

  // disjoint cover
  std::set<std::string> seen;
  for (const auto* part : {&a.train, &a.val, &a.test}) {
    for (const auto& id : part->trial_ids) CHECK(seen.insert(id).second);
  }
  CHECK(seen.size() == 10);

  CHECK_THROWS_AS((void)split_dataset(ds, SplitRatios{1.0, 0.0, 0.0}, 7), Error);
}

TEST_CASE("batch plan covers every sample exactly once") {
  const auto batches = make_batches(161, 100, false, 0, 0);
  REQUIRE(batches.size() == 2);
  CHECK(batches[0].size() == 100);
  CHECK(batches[1].size() == 61);

  const auto singles = make_batches(5, 1, false, 0, 0);
  CHECK(singles.size() == 5);

  // unshuffled order is construction order
  for (long i = 0; i < 100; ++i) CHECK(batches[0][static_cast<std::size_t>(i)] == i);

  // shuffled: same (seed, epoch) agrees, different epoch differs, coverage holds
  const auto s1 = make_batches(500, 64, true, 42, 3);
  const auto s2 = make_batches(500, 64, true, 42, 3);
  const auto s3 = make_batches(500, 64, true, 42, 4);
  CHECK(s1 == s2);
  CHECK(s1 != s3);
  std::set<long> cover;
  for (const auto& b : s1) cover.insert(b.begin(), b.end());
  CHECK(cover.size() == 500);
}

TEST_CASE("dataset binary round-trip is bit-exact; CSV export parses") {
  Rng rng(8);
  WindowConfig cfg;
  cfg.lags = 3;
  cfg.transfer_delay = 2;
  Tensor eeg({4, 40});
  for (auto& v : eeg.data) v = rng.gaussian();
  Tensor kin({3, 40});
  for (auto& v : kin.data) v = rng.gaussian();
  const LaggedDataset ds = build_windows(eeg, kin, cfg, "trial_a");

  const auto dir = nktest::scratch_dir("dataset");
  save_dataset(dir / "ds.bin", ds);
  const LaggedDataset back = load_dataset(dir / "ds.bin");
  CHECK(back.inputs.data == ds.inputs.data);
  CHECK(back.targets.data == ds.targets.data);
  CHECK(back.trial_ids == ds.trial_ids);
  CHECK(back.config.lags == 3);
  CHECK(back.config.transfer_delay == 2);
  export_dataset_csv(dir / "ds.csv", ds);
  CHECK(std::filesystem::exists(dir / "ds.csv"));

  CHECK_THROWS_AS((void)load_dataset(dir / "nope.bin"), Error);
}

TEST_CASE("gather_batch materializes the right rows") {
  WindowConfig cfg;
  cfg.lags = 1;
  cfg.transfer_delay = 0;
  const Tensor eeg = iota_eeg(2, 10);
  const Tensor kin = iota_kin(10);
  const LaggedDataset ds = build_windows(eeg, kin, cfg);
  const auto [in, tgt] = gather_batch(ds, {4, 0});
  CHECK(in.shape[0] == 2);
  CHECK(tgt.at(0, 0) == ds.targets.at(4, 0));
  CHECK(tgt.at(1, 0) == ds.targets.at(0, 0));
  const long width = ds.inputs.numel() / ds.n_samples();
  for (long i = 0; i < width; ++i) {
    CHECK(in.data[static_cast<std::size_t>(i)] ==
          ds.inputs.data[static_cast<std::size_t>(4 * width + i)]);
  }
}
