#pragma once

#include <string>
#include <vector>

#include "dmpnn/trainer.hpp"

namespace dmpnn {

struct EvalGrid {
  std::vector<int> n_list;
  std::vector<double> p_test_list;
  int samples = 1000;
  int grid_points = 0;  // 0 disables the grid-oracle baseline
  std::string graph_file;

  bool operator==(const EvalGrid&) const = default;
};

struct ExperimentConfig {
  std::string name;
  std::string out_dir;
  TrainConfig train;
  EvalGrid eval;

  bool operator==(const ExperimentConfig&) const = default;
};

// Flat key=value format with [sections]; '#' starts a comment. Unknown
// sections or keys are hard errors that carry the file name and line number.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical serialization (fixed key order); reparsing it reproduces the
// config. Also the input of config_hash.
std::string serialize_config(const ExperimentConfig& cfg);
uint64_t config_hash(const ExperimentConfig& cfg);

// "# config_hash=<hex> master_seed=<dec>" - the comment line carried by
// every emitted CSV.
std::string csv_comment(const ExperimentConfig& cfg);

std::vector<std::string> preset_names();
// Returns the embedded preset text; throws for unknown names.
const std::string& preset_text(const std::string& name);
ExperimentConfig preset(const std::string& name);

}  // namespace dmpnn
