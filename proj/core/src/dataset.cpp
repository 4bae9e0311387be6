#include "neurokinect/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>

#include "neurokinect/csv.hpp"
#include "neurokinect/errors.hpp"
#include "neurokinect/rng.hpp"

namespace nk {

namespace {

void append_trial_windows(LaggedDataset& ds, const Tensor& eeg, const Tensor& kin,
                          int trial_index, long& cursor) {
  const int l = ds.config.lags;
  const int d = ds.config.transfer_delay;
  const int n = ds.n_channels;
  const int steps = l + 1;
  const int t_len = eeg.cols();
  const long count = t_len - l - d;
  for (long t = 0; t < count; ++t) {
    double* in = ds.inputs.ptr() + cursor * static_cast<long>(steps) * n;
    if (ds.config.layout == WindowLayout::Sequence) {
      for (int j = 0; j < steps; ++j) {
        for (int ch = 0; ch < n; ++ch) {
          in[static_cast<std::size_t>(j) * n + ch] = eeg.at(ch, static_cast<int>(t) + j);
        }
      }
    } else {
      // newest frame first: block i holds EEG[:, t + l - i]
      for (int i = 0; i < steps; ++i) {
        for (int ch = 0; ch < n; ++ch) {
          in[static_cast<std::size_t>(i) * n + ch] = eeg.at(ch, static_cast<int>(t) + l - i);
        }
      }
    }
    for (int a = 0; a < 3; ++a) {
      ds.targets.at(static_cast<int>(cursor), a) = kin.at(a, static_cast<int>(t) + l + d);
    }
    ds.provenance.push_back(SampleRef{trial_index, static_cast<int>(t)});
    ++cursor;
  }
}

}  // namespace

LaggedDataset build_windows(const Tensor& eeg, const Tensor& kin,
                            const WindowConfig& cfg, const std::string& trial_id) {
  TrialSignals t;
  t.trial_id = trial_id;
  t.eeg = &eeg;
  t.kin = &kin;
  return build_dataset({t}, cfg);
}

LaggedDataset build_dataset(const std::vector<TrialSignals>& trials,
                            const WindowConfig& cfg) {
  if (cfg.lags < 0 || cfg.transfer_delay < 0) {
    throw Error(ErrorKind::InvalidConfig, "lags and transfer_delay must be >= 0");
  }
  if (trials.empty()) {
    throw Error(ErrorKind::EmptyInput, "no trials to window");
  }
  const int n = trials[0].eeg->rows();
  long total = 0;
  for (const auto& t : trials) {
    if (t.eeg->rows() != n) {
      throw Error(ErrorKind::ShapeMismatch, t.trial_id + ": channel count mismatch");
    }
    if (t.kin->rows() != 3 || t.kin->cols() != t.eeg->cols()) {
      throw Error(ErrorKind::ShapeMismatch,
                  t.trial_id + ": kinematics " + t.kin->shape_str() +
                      " vs EEG " + t.eeg->shape_str());
    }
    const long count = t.eeg->cols() - cfg.lags - cfg.transfer_delay;
    if (count < 1) {
      throw Error(ErrorKind::TrialTooShort,
                  t.trial_id + ": " + std::to_string(t.eeg->cols()) +
                      " samples cannot host a window of l=" + std::to_string(cfg.lags) +
                      ", d=" + std::to_string(cfg.transfer_delay));
    }
    total += count;
  }
  const int steps = cfg.lags + 1;
  LaggedDataset ds;
  ds.config = cfg;
  ds.n_channels = n;
  ds.inputs = cfg.layout == WindowLayout::Sequence
                  ? Tensor({static_cast<int>(total), steps, n})
                  : Tensor({static_cast<int>(total), steps * n});
  ds.targets = Tensor({static_cast<int>(total), 3});
  ds.provenance.reserve(static_cast<std::size_t>(total));
  long cursor = 0;
  for (std::size_t k = 0; k < trials.size(); ++k) {
    ds.trial_ids.push_back(trials[k].trial_id);
    append_trial_windows(ds, *trials[k].eeg, *trials[k].kin, static_cast<int>(k), cursor);
  }
  return ds;
}

namespace {

LaggedDataset take_trials(const LaggedDataset& ds, const std::vector<int>& trial_set) {
  LaggedDataset out;
  out.config = ds.config;
  out.n_channels = ds.n_channels;
  std::vector<int> remap(ds.trial_ids.size(), -1);
  for (int idx : trial_set) {
    remap[static_cast<std::size_t>(idx)] = static_cast<int>(out.trial_ids.size());
    out.trial_ids.push_back(ds.trial_ids[static_cast<std::size_t>(idx)]);
  }
  long count = 0;
  for (const auto& p : ds.provenance) {
    if (remap[static_cast<std::size_t>(p.trial_index)] >= 0) ++count;
  }
  const long in_width = ds.inputs.numel() / std::max<long>(ds.n_samples(), 1);
  std::vector<int> in_shape = ds.inputs.shape;
  in_shape[0] = static_cast<int>(count);
  out.inputs = Tensor(in_shape);
  out.targets = Tensor({static_cast<int>(count), 3});
  out.provenance.reserve(static_cast<std::size_t>(count));
  long cursor = 0;
  for (long s = 0; s < ds.n_samples(); ++s) {
    const auto& p = ds.provenance[static_cast<std::size_t>(s)];
    const int m = remap[static_cast<std::size_t>(p.trial_index)];
    if (m < 0) continue;
    std::copy(ds.inputs.ptr() + s * in_width, ds.inputs.ptr() + (s + 1) * in_width,
              out.inputs.ptr() + cursor * in_width);
    for (int a = 0; a < 3; ++a) {
      out.targets.at(static_cast<int>(cursor), a) = ds.targets.at(static_cast<int>(s), a);
    }
    out.provenance.push_back(SampleRef{m, p.t});
    ++cursor;
  }
  return out;
}

}  // namespace

DatasetSplit split_dataset(const LaggedDataset& ds, const SplitRatios& ratios,
                           std::uint64_t seed) {
  const double sum = ratios.train + ratios.val + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9 || ratios.train < 0 || ratios.val < 0 || ratios.test < 0) {
    throw Error(ErrorKind::InvalidConfig, "split ratios must be non-negative and sum to 1");
  }
  const int n_trials = static_cast<int>(ds.trial_ids.size());
  std::vector<int> order(static_cast<std::size_t>(n_trials));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::derive(seed, rng_stream::kSplit));
  rng.shuffle(order);

  // Largest-remainder apportionment of trials to the three partitions.
  const double want[3] = {ratios.train * n_trials, ratios.val * n_trials,
                          ratios.test * n_trials};
  int counts[3];
  double frac[3];
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    counts[i] = static_cast<int>(want[i]);
    frac[i] = want[i] - counts[i];
    assigned += counts[i];
  }
  while (assigned < n_trials) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (frac[i] > frac[best]) best = i;
    }
    ++counts[best];
    frac[best] = -1.0;
    ++assigned;
  }
  static const char* names[3] = {"train", "val", "test"};
  for (int i = 0; i < 3; ++i) {
    if (counts[i] == 0) {
      throw Error(ErrorKind::EmptyPartition,
                  std::string(names[i]) + " partition received zero trials");
    }
  }
  std::vector<int> sets[3];
  int at = 0;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < counts[i]; ++k) sets[i].push_back(order[static_cast<std::size_t>(at++)]);
    std::sort(sets[i].begin(), sets[i].end());  // keep session order inside a partition
  }
  DatasetSplit split;
  split.train = take_trials(ds, sets[0]);
  split.val = take_trials(ds, sets[1]);
  split.test = take_trials(ds, sets[2]);
  return split;
}

std::vector<std::vector<long>> make_batches(long n_samples, int batch_size,
                                            bool shuffle, std::uint64_t seed,
                                            int epoch) {
  if (batch_size < 1) {
    throw Error(ErrorKind::InvalidConfig, "batch_size must be >= 1");
  }
  std::vector<long> order(static_cast<std::size_t>(n_samples));
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    Rng rng(Rng::derive(seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(epoch),
                        rng_stream::kShuffle));
    rng.shuffle(order);
  }
  std::vector<std::vector<long>> batches;
  for (long at = 0; at < n_samples; at += batch_size) {
    const long end = std::min<long>(n_samples, at + batch_size);
    batches.emplace_back(order.begin() + at, order.begin() + end);
  }
  return batches;
}

std::pair<Tensor, Tensor> gather_batch(const LaggedDataset& ds,
                                       const std::vector<long>& indices) {
  const long b = static_cast<long>(indices.size());
  const long in_width = ds.inputs.numel() / std::max<long>(ds.n_samples(), 1);
  std::vector<int> in_shape = ds.inputs.shape;
  in_shape[0] = static_cast<int>(b);
  Tensor in(in_shape);
  Tensor tgt({static_cast<int>(b), 3});
  for (long i = 0; i < b; ++i) {
    const long s = indices[static_cast<std::size_t>(i)];
    std::copy(ds.inputs.ptr() + s * in_width, ds.inputs.ptr() + (s + 1) * in_width,
              in.ptr() + i * in_width);
    for (int a = 0; a < 3; ++a) tgt.at(static_cast<int>(i), a) = ds.targets.at(static_cast<int>(s), a);
  }
  return {std::move(in), std::move(tgt)};
}

namespace {

constexpr char kDatasetMagic[8] = {'N', 'K', 'D', 'S', '0', '0', '0', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void put_string(std::ofstream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::ifstream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

void put_tensor(std::ofstream& out, const Tensor& t) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
  for (int d : t.shape) put<std::int64_t>(out, d);
  out.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

Tensor get_tensor(std::ifstream& in) {
  const auto ndim = get<std::uint32_t>(in);
  std::vector<int> shape(ndim);
  for (auto& d : shape) d = static_cast<int>(get<std::int64_t>(in));
  Tensor t(shape);
  in.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  return t;
}

}  // namespace

void save_dataset(const std::filesystem::path& path, const LaggedDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(kDatasetMagic, sizeof(kDatasetMagic));
  put<std::int32_t>(out, ds.config.lags);
  put<std::int32_t>(out, ds.config.transfer_delay);
  put<std::int32_t>(out, ds.config.layout == WindowLayout::Sequence ? 1 : 0);
  put<std::int32_t>(out, ds.n_channels);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.trial_ids.size()));
  for (const auto& id : ds.trial_ids) put_string(out, id);
  put<std::int64_t>(out, ds.n_samples());
  for (const auto& p : ds.provenance) {
    put<std::int32_t>(out, p.trial_index);
    put<std::int32_t>(out, p.t);
  }
  put_tensor(out, ds.inputs);
  put_tensor(out, ds.targets);
  if (!out) throw Error(ErrorKind::IoError, "short write to " + path.string());
}

LaggedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::DatasetMissing, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kDatasetMagic, sizeof(magic)) != 0) {
    throw Error(ErrorKind::CorruptData, path.string() + " is not a dataset file");
  }
  LaggedDataset ds;
  ds.config.lags = get<std::int32_t>(in);
  ds.config.transfer_delay = get<std::int32_t>(in);
  ds.config.layout = get<std::int32_t>(in) == 1 ? WindowLayout::Sequence
                                                : WindowLayout::Flattened;
  ds.n_channels = get<std::int32_t>(in);
  const auto n_trials = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n_trials; ++i) ds.trial_ids.push_back(get_string(in));
  const auto n_samples = get<std::int64_t>(in);
  ds.provenance.resize(static_cast<std::size_t>(n_samples));
  for (auto& p : ds.provenance) {
    p.trial_index = get<std::int32_t>(in);
    p.t = get<std::int32_t>(in);
  }
  ds.inputs = get_tensor(in);
  ds.targets = get_tensor(in);
  if (!in) throw Error(ErrorKind::CorruptData, path.string() + " truncated");
  return ds;
}

void export_dataset_csv(const std::filesystem::path& path, const LaggedDataset& ds) {
  CsvTable table;
  const long in_width = ds.inputs.numel() / std::max<long>(ds.n_samples(), 1);
  table.header.push_back("sample");
  table.header.push_back("trial_id");
  for (long i = 0; i < in_width; ++i) table.header.push_back("in_" + std::to_string(i));
  table.header.insert(table.header.end(), {"target_x", "target_y", "target_z"});
  for (long s = 0; s < ds.n_samples(); ++s) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(in_width) + 5);
    row.push_back(std::to_string(s));
    row.push_back(ds.trial_ids[static_cast<std::size_t>(
        ds.provenance[static_cast<std::size_t>(s)].trial_index)]);
    for (long i = 0; i < in_width; ++i) {
      row.push_back(format_double(ds.inputs.data[static_cast<std::size_t>(s * in_width + i)]));
    }
    for (int a = 0; a < 3; ++a) row.push_back(format_double(ds.targets.at(static_cast<int>(s), a)));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

}  // namespace nk
