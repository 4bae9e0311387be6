#include "neurokinect/run_config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "neurokinect/errors.hpp"

namespace nk {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw Error(ErrorKind::InvalidConfig,
                  where + ": unknown key '" + it.key() + "'");
    }
  }
}

template <typename T>
void read_into(const json& obj, const std::string& key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::InvalidConfig, where + ": key '" + key + "' has wrong type");
  }
}

void parse_preprocess(const json& obj, PreprocessConfig& cfg) {
  check_keys(obj,
             {"fs_out_hz", "pass_band", "stop_atten_db", "filter_mode", "antialias",
              "trans_lo_hz", "trans_hi_hz"},
             "preprocess");
  read_into(obj, "fs_out_hz", cfg.fs_out_hz, "preprocess");
  if (obj.contains("pass_band")) {
    const auto band = obj.at("pass_band").get<std::vector<double>>();
    if (band.size() != 2) {
      throw Error(ErrorKind::InvalidConfig, "preprocess.pass_band must be [lo, hi]");
    }
    cfg.filter.pass_lo_hz = band[0];
    cfg.filter.pass_hi_hz = band[1];
  }
  read_into(obj, "stop_atten_db", cfg.filter.stop_atten_db, "preprocess");
  read_into(obj, "trans_lo_hz", cfg.filter.trans_lo_hz, "preprocess");
  read_into(obj, "trans_hi_hz", cfg.filter.trans_hi_hz, "preprocess");
  if (obj.contains("filter_mode")) {
    const auto mode = obj.at("filter_mode").get<std::string>();
    if (mode == "causal") {
      cfg.filter.design = FilterMode::Causal;
    } else if (mode == "zero_phase") {
      cfg.filter.design = FilterMode::ZeroPhase;
    } else {
      throw Error(ErrorKind::InvalidConfig,
                  "preprocess.filter_mode must be 'causal' or 'zero_phase'");
    }
  }
  if (obj.contains("antialias")) {
    const auto mode = obj.at("antialias").get<std::string>();
    if (mode == "on") {
      cfg.antialias = AntiAlias::On;
    } else if (mode == "paper_literal") {
      cfg.antialias = AntiAlias::PaperLiteral;
    } else {
      throw Error(ErrorKind::InvalidConfig,
                  "preprocess.antialias must be 'on' or 'paper_literal'");
    }
  }
  if (!(cfg.fs_out_hz > 0.0) || !(cfg.filter.pass_lo_hz > 0.0) ||
      !(cfg.filter.pass_lo_hz < cfg.filter.pass_hi_hz) ||
      !(cfg.filter.stop_atten_db > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "preprocess: invalid filter parameters");
  }
}

void parse_synth(const json& obj, SynthConfig& cfg) {
  check_keys(obj,
             {"n_channels", "fs", "n_trials", "trial_len_s", "informative_channels",
              "true_lag_samples", "noise_snr_db", "seed", "pre_led_s", "post_stop_s",
              "rt_mean_s", "rt_sd_s", "eeg_amplitude"},
             "data.synth");
  read_into(obj, "n_channels", cfg.n_channels, "data.synth");
  read_into(obj, "fs", cfg.fs, "data.synth");
  read_into(obj, "n_trials", cfg.n_trials, "data.synth");
  read_into(obj, "trial_len_s", cfg.trial_len_s, "data.synth");
  read_into(obj, "informative_channels", cfg.informative_channels, "data.synth");
  read_into(obj, "true_lag_samples", cfg.true_lag_samples, "data.synth");
  if (obj.contains("noise_snr_db")) {
    if (obj.at("noise_snr_db").is_string()) {
      if (obj.at("noise_snr_db").get<std::string>() != "inf") {
        throw Error(ErrorKind::InvalidConfig, "data.synth.noise_snr_db: number or \"inf\"");
      }
      cfg.noise_snr_db = std::numeric_limits<double>::infinity();
    } else {
      read_into(obj, "noise_snr_db", cfg.noise_snr_db, "data.synth");
    }
  }
  read_into(obj, "seed", cfg.seed, "data.synth");
  read_into(obj, "pre_led_s", cfg.pre_led_s, "data.synth");
  read_into(obj, "post_stop_s", cfg.post_stop_s, "data.synth");
  read_into(obj, "rt_mean_s", cfg.rt_mean_s, "data.synth");
  read_into(obj, "rt_sd_s", cfg.rt_sd_s, "data.synth");
  read_into(obj, "eeg_amplitude", cfg.eeg_amplitude, "data.synth");
}

void parse_qc(const json& obj, RunConfig& cfg) {
  check_keys(obj,
             {"enabled", "ma_window", "post_led_span_ms", "rt_limit_s",
              "rmse_threshold", "reference_trials"},
             "qc");
  read_into(obj, "enabled", cfg.qc_enabled, "qc");
  read_into(obj, "ma_window", cfg.qc.ma_window, "qc");
  read_into(obj, "post_led_span_ms", cfg.qc.post_led_span_ms, "qc");
  read_into(obj, "rt_limit_s", cfg.qc.rt_limit_s, "qc");
  read_into(obj, "rmse_threshold", cfg.qc.rmse_threshold, "qc");
  read_into(obj, "reference_trials", cfg.qc.reference_trials, "qc");
  if (cfg.qc.ma_window < 1 || !(cfg.qc.rt_limit_s > 0.0) ||
      !(cfg.qc.rmse_threshold > 0.0) || cfg.qc.reference_trials < 1) {
    throw Error(ErrorKind::InvalidConfig, "qc: invalid parameters");
  }
}

void parse_model(const json& obj, ModelConfig& cfg) {
  check_keys(obj,
             {"conv_branches", "lstm_hidden", "dense_widths", "dense_activation",
              "dropout_rate", "output_activation"},
             "model");
  if (obj.contains("conv_branches")) {
    cfg.conv_branches.clear();
    for (const auto& b : obj.at("conv_branches")) {
      check_keys(b, {"width", "activation"}, "model.conv_branches[]");
      ConvBranch branch;
      read_into(b, "width", branch.width, "model.conv_branches[]");
      if (b.contains("activation")) {
        branch.activation = act_from_string(b.at("activation").get<std::string>());
      }
      cfg.conv_branches.push_back(branch);
    }
  }
  read_into(obj, "lstm_hidden", cfg.lstm_hidden, "model");
  read_into(obj, "dense_widths", cfg.dense_widths, "model");
  if (obj.contains("dense_activation")) {
    cfg.dense_activation = act_from_string(obj.at("dense_activation").get<std::string>());
  }
  read_into(obj, "dropout_rate", cfg.dropout_rate, "model");
  if (obj.contains("output_activation")) {
    const auto v = obj.at("output_activation").get<std::string>();
    if (v == "linear") {
      cfg.output_activation = OutputActivation::Linear;
    } else if (v == "sigmoid") {
      cfg.output_activation = OutputActivation::Sigmoid;
    } else {
      throw Error(ErrorKind::InvalidConfig, "model.output_activation: 'linear' or 'sigmoid'");
    }
  }
}

void parse_train(const json& obj, RunConfig& cfg) {
  check_keys(obj, {"epochs", "batch_size", "learning_rate", "seed", "rho_tolerance"},
             "train");
  read_into(obj, "epochs", cfg.train.epochs, "train");
  read_into(obj, "batch_size", cfg.train.batch_size, "train");
  read_into(obj, "learning_rate", cfg.train.learning_rate, "train");
  read_into(obj, "seed", cfg.train.seed, "train");
  read_into(obj, "rho_tolerance", cfg.train.checkpoint_rho_tolerance, "train");
  if (cfg.train.epochs < 1 || cfg.train.batch_size < 1 ||
      !(cfg.train.learning_rate > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "train: invalid parameters");
  }
}

void parse_erp(const json& obj, ErpConfig& cfg) {
  check_keys(obj,
             {"pre_ms", "post_ms", "fs_epoch_hz", "min_kept_fraction",
              "exclude_channels"},
             "erp");
  read_into(obj, "pre_ms", cfg.window.pre_ms, "erp");
  read_into(obj, "post_ms", cfg.window.post_ms, "erp");
  read_into(obj, "fs_epoch_hz", cfg.fs_epoch_hz, "erp");
  read_into(obj, "min_kept_fraction", cfg.min_kept_fraction, "erp");
  read_into(obj, "exclude_channels", cfg.exclude_channels, "erp");
  if (!(cfg.window.pre_ms > 0.0) || !(cfg.window.post_ms > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "erp: window spans must be positive");
  }
}

void validate_window(const WindowConfig& cfg) {
  if (cfg.lags < 0 || cfg.transfer_delay < 0) {
    throw Error(ErrorKind::InvalidConfig, "window: lags and transfer_delay must be >= 0");
  }
}

}  // namespace

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.erp.qc = cfg.qc;
  apply_seed(cfg, cfg.seed);
  return cfg;
}

void apply_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.synth.seed = seed;
  cfg.model.seed = seed;
  cfg.train.seed = seed;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::MissingFile, "cannot open config " + path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, "config parse error: " + std::string(e.what()));
  }
  check_keys(doc, {"data", "preprocess", "qc", "window", "split", "model", "train",
                   "erp", "output_dir", "seed"},
             "config");

  RunConfig cfg;
  read_into(doc, "seed", cfg.seed, "config");
  apply_seed(cfg, cfg.seed);

  if (doc.contains("data")) {
    const auto& data = doc.at("data");
    check_keys(data, {"source", "dir", "synth"}, "data");
    std::string source = "synth";
    read_into(data, "source", source, "data");
    if (source == "dir") {
      cfg.synthetic = false;
      std::string dir;
      read_into(data, "dir", dir, "data");
      if (dir.empty()) {
        throw Error(ErrorKind::InvalidConfig, "data.source='dir' needs data.dir");
      }
      cfg.data_dir = dir;
    } else if (source != "synth") {
      throw Error(ErrorKind::InvalidConfig, "data.source must be 'synth' or 'dir'");
    }
    if (data.contains("synth")) parse_synth(data.at("synth"), cfg.synth);
  }
  if (doc.contains("preprocess")) parse_preprocess(doc.at("preprocess"), cfg.preprocess);
  if (doc.contains("qc")) parse_qc(doc.at("qc"), cfg);
  if (doc.contains("window")) {
    check_keys(doc.at("window"), {"lags", "transfer_delay"}, "window");
    read_into(doc.at("window"), "lags", cfg.window.lags, "window");
    read_into(doc.at("window"), "transfer_delay", cfg.window.transfer_delay, "window");
  }
  validate_window(cfg.window);
  if (doc.contains("split")) {
    check_keys(doc.at("split"), {"train", "val", "test"}, "split");
    read_into(doc.at("split"), "train", cfg.split.train, "split");
    read_into(doc.at("split"), "val", cfg.split.val, "split");
    read_into(doc.at("split"), "test", cfg.split.test, "split");
  }
  if (doc.contains("model")) parse_model(doc.at("model"), cfg.model);
  if (doc.contains("train")) parse_train(doc.at("train"), cfg);
  if (doc.contains("erp")) parse_erp(doc.at("erp"), cfg.erp);
  cfg.erp.qc = cfg.qc_enabled ? std::optional<QcConfig>(cfg.qc) : std::nullopt;
  if (doc.contains("output_dir")) {
    std::string dir;
    read_into(doc, "output_dir", dir, "config");
    cfg.output_dir = dir;
  }

  // The model's input geometry follows the window config; set late so both
  // sections may appear in any order.
  cfg.model.window_steps = cfg.window.lags + 1;
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  json doc;
  doc["seed"] = cfg.seed;
  doc["data"]["source"] = cfg.synthetic ? "synth" : "dir";
  if (!cfg.synthetic) doc["data"]["dir"] = cfg.data_dir.string();
  doc["data"]["synth"] = {{"n_channels", cfg.synth.n_channels},
                          {"fs", cfg.synth.fs},
                          {"n_trials", cfg.synth.n_trials},
                          {"trial_len_s", cfg.synth.trial_len_s},
                          {"informative_channels", cfg.synth.informative_channels},
                          {"true_lag_samples", cfg.synth.true_lag_samples},
                          {"noise_snr_db", std::isinf(cfg.synth.noise_snr_db)
                                               ? json("inf")
                                               : json(cfg.synth.noise_snr_db)},
                          {"seed", cfg.synth.seed},
                          {"pre_led_s", cfg.synth.pre_led_s},
                          {"post_stop_s", cfg.synth.post_stop_s},
                          {"rt_mean_s", cfg.synth.rt_mean_s},
                          {"rt_sd_s", cfg.synth.rt_sd_s},
                          {"eeg_amplitude", cfg.synth.eeg_amplitude}};
  doc["preprocess"] = {{"fs_out_hz", cfg.preprocess.fs_out_hz},
                       {"pass_band", {cfg.preprocess.filter.pass_lo_hz,
                                      cfg.preprocess.filter.pass_hi_hz}},
                       {"stop_atten_db", cfg.preprocess.filter.stop_atten_db},
                       {"filter_mode", cfg.preprocess.filter.design == FilterMode::ZeroPhase
                                           ? "zero_phase"
                                           : "causal"},
                       {"antialias", cfg.preprocess.antialias == AntiAlias::On
                                         ? "on"
                                         : "paper_literal"},
                       {"trans_lo_hz", cfg.preprocess.filter.trans_lo_hz},
                       {"trans_hi_hz", cfg.preprocess.filter.trans_hi_hz}};
  doc["qc"] = {{"enabled", cfg.qc_enabled},
               {"ma_window", cfg.qc.ma_window},
               {"post_led_span_ms", cfg.qc.post_led_span_ms},
               {"rt_limit_s", cfg.qc.rt_limit_s},
               {"rmse_threshold", cfg.qc.rmse_threshold},
               {"reference_trials", cfg.qc.reference_trials}};
  doc["window"] = {{"lags", cfg.window.lags}, {"transfer_delay", cfg.window.transfer_delay}};
  doc["split"] = {{"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}};
  json branches = json::array();
  for (const auto& b : cfg.model.conv_branches) {
    branches.push_back({{"width", b.width}, {"activation", to_string(b.activation)}});
  }
  doc["model"] = {{"conv_branches", branches},
                  {"lstm_hidden", cfg.model.lstm_hidden},
                  {"dense_widths", cfg.model.dense_widths},
                  {"dense_activation", to_string(cfg.model.dense_activation)},
                  {"dropout_rate", cfg.model.dropout_rate},
                  {"output_activation", cfg.model.output_activation == OutputActivation::Sigmoid
                                            ? "sigmoid"
                                            : "linear"}};
  doc["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate},
                  {"seed", cfg.train.seed},
                  {"rho_tolerance", cfg.train.checkpoint_rho_tolerance}};
  doc["erp"] = {{"pre_ms", cfg.erp.window.pre_ms},
                {"post_ms", cfg.erp.window.post_ms},
                {"fs_epoch_hz", cfg.erp.fs_epoch_hz},
                {"min_kept_fraction", cfg.erp.min_kept_fraction},
                {"exclude_channels", cfg.erp.exclude_channels}};
  doc["output_dir"] = cfg.output_dir.string();
  return doc.dump(2);
}

}  // namespace nk
