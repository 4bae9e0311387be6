#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "neurokinect/dataset.hpp"
#include "neurokinect/model.hpp"
#include "neurokinect/pipeline.hpp"
#include "neurokinect/synth.hpp"
#include "neurokinect/train.hpp"

namespace nk {

// One structured config file drives every stage; flags may override
// individual keys. Unknown keys are rejected so typos cannot silently fall
// back to defaults. Schema in docs/formats.md.
struct RunConfig {
  // data source: either a session directory or a synthetic session spec
  std::filesystem::path data_dir;  // empty when synthetic
  SynthConfig synth;
  bool synthetic = true;

  PreprocessConfig preprocess;
  bool qc_enabled = true;
  QcConfig qc;
  WindowConfig window;
  SplitRatios split;
  ModelConfig model;
  TrainOptions train;
  ErpConfig erp;
  std::filesystem::path output_dir = "runs/default";

  std::uint64_t seed = 0;  // master seed; propagated to synth/model/train
};

// Parses and fully validates a config file before any stage runs.
RunConfig load_run_config(const std::filesystem::path& path);

// Defaults without a file.
RunConfig default_run_config();

// Applies the master seed to the per-stage seeds and re-validates.
void apply_seed(RunConfig& cfg, std::uint64_t seed);

// Serialized echo of the effective config (written into run directories).
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace nk
