#include "dmpnn/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dmpnn {

CellStats stats_of(const std::vector<double>& values) {
  CellStats s;
  s.samples = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.samples;
  if (s.samples > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.se = std::sqrt(ss / (s.samples - 1)) / std::sqrt(static_cast<double>(s.samples));
  }
  return s;
}

std::string cell_tag(int n, double p_test) {
  char buf[48];
  if (n < 0)
    std::snprintf(buf, sizeof(buf), "eval.nmix.p%g", p_test);
  else
    std::snprintf(buf, sizeof(buf), "eval.n%d.p%g", n, p_test);
  return buf;
}

TrainConfig cell_config(const ExperimentConfig& cfg, int n, double p_test) {
  TrainConfig c = cfg.train;
  if (n >= 0) {
    c.n_min = n;
    c.n_max = n;
    if (c.n_population < n) c.n_population = n;
  }
  c.p_train = p_test;
  return c;
}

CellStats eval_model_cell(const ParameterSet& params, const ExperimentConfig& cfg, int n,
                          double p_test, int samples, ThreadPool* pool) {
  const TrainConfig cell = cell_config(cfg, n, p_test);
  const std::string tag = cell_tag(n, p_test);
  return stats_of(per_sample_utilities(params, cell, tag, 0, samples, pool));
}

CellStats eval_baseline_cell(const ExperimentConfig& cfg, const std::string& method, int n,
                             double p_test, int samples, ThreadPool* pool) {
  const TrainConfig cell = cell_config(cfg, n, p_test);
  const std::string tag = cell_tag(n, p_test);
  const double power_max = cell.dims.power_max;
  std::vector<double> values(samples);
  auto task = [&](int k) {
    Sample sample = draw_sample(cell, tag, k);
    std::vector<double> power;
    if (method == "wmmse") {
      power = wmmse(sample.chan, sample.net, power_max).power;
    } else if (method == "peak") {
      power = peak_power(sample.net.size(), power_max);
    } else if (method == "random") {
      RngStream rng(cell.seed, "random-power." + tag, k);
      power = random_power(sample.net.size(), power_max, rng);
    } else if (method == "grid") {
      if (cfg.eval.grid_points < 2)
        throw std::invalid_argument("grid baseline requires grid_points >= 2 in [eval]");
      values[k] = grid_oracle(sample.chan, sample.net, power_max, cell.objective,
                              cfg.eval.grid_points)
                      .value;
      return;
    } else {
      throw std::invalid_argument("unknown baseline method '" + method + "'");
    }
    values[k] = utility(cell.objective, sample.chan, power, sample.net);
  };
  if (pool) {
    pool->run(samples, task);
  } else {
    for (int k = 0; k < samples; ++k) task(k);
  }
  return stats_of(values);
}

std::vector<CellStats> trajectory_curve(const ParameterSet& params, const ExperimentConfig& cfg,
                                        const MultiplexNetwork& net, int samples,
                                        ThreadPool* pool) {
  const int rounds = cfg.train.iterations;
  std::vector<std::vector<double>> per_round(rounds, std::vector<double>(samples));
  auto task = [&](int k) {
    RngStream chan_rng(cfg.train.seed, "channels.trajectory", k);
    ChannelRealization chan = sample_channels(net.size(), chan_rng);
    RngStream state_rng(cfg.train.seed, "states.trajectory", k);
    std::vector<Tensor> states = draw_initial_states(net.size(), params.dims.state, state_rng);
    Trajectory traj = run_inference_with_states(net, chan, params, rounds, states);
    for (int t = 0; t < rounds; ++t)
      per_round[t][k] = utility(cfg.train.objective, chan, traj.powers[t], net);
  };
  if (pool) {
    pool->run(samples, task);
  } else {
    for (int k = 0; k < samples; ++k) task(k);
  }
  std::vector<CellStats> curve;
  curve.reserve(rounds);
  for (int t = 0; t < rounds; ++t) curve.push_back(stats_of(per_round[t]));
  return curve;
}

namespace {

std::ofstream open_csv(const std::string& path, const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file " + path);
  out << "# " << csv_comment(cfg) << "\n";
  return out;
}

}  // namespace

void write_eval_csv(const std::string& path, const ExperimentConfig& cfg,
                    const std::vector<std::tuple<int, double, std::string, CellStats>>& rows) {
  std::ofstream out = open_csv(path, cfg);
  out << "n,p_test,method,mean_utility,stderr,samples\n";
  char buf[160];
  for (const auto& [n, p, method, stats] : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%g,%s,%.8g,%.4g,%d", n, p, method.c_str(), stats.mean,
                  stats.se, stats.samples);
    out << buf << "\n";
  }
}

void write_trajectory_curve_csv(const std::string& path, const ExperimentConfig& cfg,
                                const std::vector<CellStats>& curve) {
  std::ofstream out = open_csv(path, cfg);
  out << "t,mean_utility,stderr,samples\n";
  char buf[120];
  for (size_t t = 0; t < curve.size(); ++t) {
    std::snprintf(buf, sizeof(buf), "%zu,%.8g,%.4g,%d", t + 1, curve[t].mean, curve[t].se,
                  curve[t].samples);
    out << buf << "\n";
  }
}

void write_train_log_csv(const std::string& path, const ExperimentConfig& cfg,
                         const std::vector<double>& train_objective,
                         const std::vector<double>& val_utility,
                         const std::vector<double>& seconds) {
  std::ofstream out = open_csv(path, cfg);
  out << "epoch,train_objective,val_utility,seconds\n";
  char buf[160];
  for (size_t e = 0; e < train_objective.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.8g,%.8g,%.2f", e + 1, train_objective[e],
                  val_utility.size() > e ? val_utility[e] : 0.0,
                  seconds.size() > e ? seconds[e] : 0.0);
    out << buf << "\n";
  }
}

}  // namespace dmpnn
