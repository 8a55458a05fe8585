#include "dmpnn/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace dmpnn {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, const std::string& origin, int line) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    fail(origin, line, "expected a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& v, const std::string& origin, int line) {
  try {
    size_t pos = 0;
    long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (...) {
    fail(origin, line, "expected an integer, got '" + v + "'");
  }
}

uint64_t parse_u64(const std::string& v, const std::string& origin, int line) {
  try {
    size_t pos = 0;
    uint64_t i = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (...) {
    fail(origin, line, "expected an unsigned integer, got '" + v + "'");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::string format_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  return buf;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(origin, line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "experiment" && section != "dims" && section != "problem" &&
          section != "train" && section != "eval")
        fail(origin, line, "unknown section [" + section + "]");
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) fail(origin, line, "key '" + key + "' outside any section");

    TrainConfig& t = cfg.train;
    OperatorDims& d = t.dims;
    if (section == "experiment") {
      if (key == "name")
        cfg.name = value;
      else if (key == "objective") {
        if (value == "sum-rate")
          t.objective = Objective::kSumRate;
        else if (value == "min-rate")
          t.objective = Objective::kMinRate;
        else
          fail(origin, line, "objective must be sum-rate or min-rate, got '" + value + "'");
      } else if (key == "seed")
        t.seed = parse_u64(value, origin, line);
      else if (key == "out")
        cfg.out_dir = value;
      else
        fail(origin, line, "unknown key '" + key + "' in [experiment]");
    } else if (section == "dims") {
      if (key == "state")
        d.state = static_cast<int>(parse_int(value, origin, line));
      else if (key == "message")
        d.message = static_cast<int>(parse_int(value, origin, line));
      else if (key == "combined")
        d.combined = static_cast<int>(parse_int(value, origin, line));
      else if (key == "decision")
        d.decision = static_cast<int>(parse_int(value, origin, line));
      else if (key == "local_obs")
        d.local_obs = static_cast<int>(parse_int(value, origin, line));
      else if (key == "cross_obs")
        d.cross_obs = static_cast<int>(parse_int(value, origin, line));
      else if (key == "hidden")
        d.hidden = static_cast<int>(parse_int(value, origin, line));
      else if (key == "layers")
        d.layers = static_cast<int>(parse_int(value, origin, line));
      else
        fail(origin, line, "unknown key '" + key + "' in [dims]");
    } else if (section == "problem") {
      if (key == "power")
        d.power_max = parse_double(value, origin, line);
      else if (key == "iterations")
        t.iterations = static_cast<int>(parse_int(value, origin, line));
      else if (key == "n_min")
        t.n_min = static_cast<int>(parse_int(value, origin, line));
      else if (key == "n_max")
        t.n_max = static_cast<int>(parse_int(value, origin, line));
      else if (key == "n_population")
        t.n_population = static_cast<int>(parse_int(value, origin, line));
      else if (key == "p_train")
        t.p_train = parse_double(value, origin, line);
      else if (key == "p_physical")
        t.p_physical = parse_double(value, origin, line);
      else
        fail(origin, line, "unknown key '" + key + "' in [problem]");
    } else if (section == "train") {
      if (key == "epochs")
        t.epochs = static_cast<int>(parse_int(value, origin, line));
      else if (key == "batches_per_epoch")
        t.batches_per_epoch = static_cast<int>(parse_int(value, origin, line));
      else if (key == "batch_size")
        t.batch_size = static_cast<int>(parse_int(value, origin, line));
      else if (key == "learning_rate")
        t.learning_rate = parse_double(value, origin, line);
      else if (key == "val_samples")
        t.val_samples = static_cast<int>(parse_int(value, origin, line));
      else if (key == "threads")
        t.threads = static_cast<int>(parse_int(value, origin, line));
      else
        fail(origin, line, "unknown key '" + key + "' in [train]");
    } else if (section == "eval") {
      if (key == "n_list") {
        cfg.eval.n_list.clear();
        for (const std::string& item : split_list(value))
          cfg.eval.n_list.push_back(static_cast<int>(parse_int(item, origin, line)));
      } else if (key == "p_test_list") {
        cfg.eval.p_test_list.clear();
        for (const std::string& item : split_list(value))
          cfg.eval.p_test_list.push_back(parse_double(item, origin, line));
      } else if (key == "samples")
        cfg.eval.samples = static_cast<int>(parse_int(value, origin, line));
      else if (key == "grid_points")
        cfg.eval.grid_points = static_cast<int>(parse_int(value, origin, line));
      else if (key == "graph_file")
        cfg.eval.graph_file = value;
      else
        fail(origin, line, "unknown key '" + key + "' in [eval]");
    }
  }
  if (cfg.name.empty()) throw std::runtime_error(origin + ": missing experiment name");
  cfg.train.validate();
  if (cfg.eval.samples < 1) throw std::runtime_error(origin + ": eval samples must be >= 1");
  for (double p : cfg.eval.p_test_list)
    if (p < 0.0 || p > 1.0) throw std::runtime_error(origin + ": p_test outside [0,1]");
  for (int n : cfg.eval.n_list)
    if (n < 1) throw std::runtime_error(origin + ": eval n must be >= 1");
  if (cfg.out_dir.empty()) cfg.out_dir = "out/" + cfg.name;
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
  const TrainConfig& t = cfg.train;
  const OperatorDims& d = t.dims;
  std::ostringstream out;
  out << "[experiment]\n";
  out << "name = " << cfg.name << "\n";
  out << "objective = " << (t.objective == Objective::kSumRate ? "sum-rate" : "min-rate") << "\n";
  out << "seed = " << t.seed << "\n";
  out << "out = " << cfg.out_dir << "\n";
  out << "[dims]\n";
  out << "state = " << d.state << "\n";
  out << "message = " << d.message << "\n";
  out << "combined = " << d.combined << "\n";
  out << "decision = " << d.decision << "\n";
  out << "local_obs = " << d.local_obs << "\n";
  out << "cross_obs = " << d.cross_obs << "\n";
  out << "hidden = " << d.hidden << "\n";
  out << "layers = " << d.layers << "\n";
  out << "[problem]\n";
  out << "power = " << format_double(d.power_max) << "\n";
  out << "iterations = " << t.iterations << "\n";
  out << "n_min = " << t.n_min << "\n";
  out << "n_max = " << t.n_max << "\n";
  out << "n_population = " << t.n_population << "\n";
  out << "p_train = " << format_double(t.p_train) << "\n";
  out << "p_physical = " << format_double(t.p_physical) << "\n";
  out << "[train]\n";
  out << "epochs = " << t.epochs << "\n";
  out << "batches_per_epoch = " << t.batches_per_epoch << "\n";
  out << "batch_size = " << t.batch_size << "\n";
  out << "learning_rate = " << format_double(t.learning_rate) << "\n";
  out << "val_samples = " << t.val_samples << "\n";
  out << "threads = " << t.threads << "\n";
  out << "[eval]\n";
  out << "n_list = ";
  for (size_t i = 0; i < cfg.eval.n_list.size(); ++i)
    out << (i ? "," : "") << cfg.eval.n_list[i];
  out << "\n";
  out << "p_test_list = ";
  for (size_t i = 0; i < cfg.eval.p_test_list.size(); ++i)
    out << (i ? "," : "") << format_double(cfg.eval.p_test_list[i]);
  out << "\n";
  out << "samples = " << cfg.eval.samples << "\n";
  out << "grid_points = " << cfg.eval.grid_points << "\n";
  out << "graph_file = " << cfg.eval.graph_file << "\n";
  return out.str();
}

uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a64(serialize_config(cfg));
}

std::string csv_comment(const ExperimentConfig& cfg) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "config_hash=%016llx master_seed=%llu",
                static_cast<unsigned long long>(config_hash(cfg)),
                static_cast<unsigned long long>(cfg.train.seed));
  return buf;
}

namespace {

const std::map<std::string, std::string>& preset_map() {
  static const std::map<std::string, std::string> presets = {
      {"p1-desk", R"(# Desk-scale sum-rate run: small N range, short schedule.
[experiment]
name = p1-desk
objective = sum-rate
seed = 20240601

[dims]
state = 50
message = 10
combined = 50
decision = 1
local_obs = 1
cross_obs = 1
hidden = 100
layers = 3

[problem]
power = 10
iterations = 10
n_min = 3
n_max = 5
n_population = 10
p_train = 0.7
p_physical = 1

[train]
epochs = 200
batches_per_epoch = 20
batch_size = 256
learning_rate = 0.001
val_samples = 256
threads = 0

[eval]
n_list = 3,4,5
p_test_list = 0,0.5,1
samples = 1000
grid_points = 0
graph_file =
)"},
      {"p2-desk", R"(# Desk-scale max-min run: fixed N=3, complete social graph.
[experiment]
name = p2-desk
objective = min-rate
seed = 20240602

[dims]
state = 50
message = 10
combined = 50
decision = 1
local_obs = 1
cross_obs = 1
hidden = 150
layers = 4

[problem]
power = 10
iterations = 10
n_min = 3
n_max = 3
n_population = 10
p_train = 1
p_physical = 1

[train]
epochs = 100
batches_per_epoch = 20
batch_size = 128
learning_rate = 0.001
val_samples = 256
threads = 0

[eval]
n_list = 3
p_test_list = 1
samples = 500
grid_points = 51
graph_file =
)"},
      {"p1-paper", R"(# Full-scale sum-rate settings; long-running.
[experiment]
name = p1-paper
objective = sum-rate
seed = 20240601

[dims]
state = 50
message = 10
combined = 50
decision = 1
local_obs = 1
cross_obs = 1
hidden = 100
layers = 3

[problem]
power = 10
iterations = 20
n_min = 3
n_max = 10
n_population = 10
p_train = 0.7
p_physical = 1

[train]
epochs = 1000
batches_per_epoch = 50
batch_size = 1000
learning_rate = 0.0001
val_samples = 10000
threads = 0

[eval]
n_list = 3,5,7,9
p_test_list = 0,0.5,0.7,1
samples = 10000
grid_points = 0
graph_file =
)"},
      {"p2-paper", R"(# Full-scale max-min settings; long-running.
[experiment]
name = p2-paper
objective = min-rate
seed = 20240602

[dims]
state = 50
message = 10
combined = 50
decision = 1
local_obs = 1
cross_obs = 1
hidden = 150
layers = 4

[problem]
power = 10
iterations = 10
n_min = 3
n_max = 10
n_population = 10
p_train = 0.7
p_physical = 1

[train]
epochs = 1000
batches_per_epoch = 50
batch_size = 1000
learning_rate = 0.0001
val_samples = 10000
threads = 0

[eval]
n_list = 3,5,7,9
p_test_list = 0,0.5,0.7,1
samples = 10000
grid_points = 0
graph_file =
)"},
  };
  return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : preset_map()) names.push_back(name);
  return names;
}

const std::string& preset_text(const std::string& name) {
  const auto& presets = preset_map();
  auto it = presets.find(name);
  if (it == presets.end()) throw std::runtime_error("unknown preset '" + name + "'");
  return it->second;
}

ExperimentConfig preset(const std::string& name) {
  return parse_config_text(preset_text(name), "preset:" + name);
}

}  // namespace dmpnn
