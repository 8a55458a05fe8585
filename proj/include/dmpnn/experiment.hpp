#pragma once

#include <string>
#include <vector>

#include "dmpnn/config.hpp"
#include "dmpnn/trainer.hpp"

namespace dmpnn {

struct CellStats {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
  int samples = 0;
};

CellStats stats_of(const std::vector<double>& values);

// Stream tag of one sweep cell; shared by the learned model and every
// baseline so all methods see identical channel and graph draws.
std::string cell_tag(int n, double p_test);

// Copy of the training config that samples this cell: fixed N (or the
// training range when n < 0) and social edge probability p_test.
TrainConfig cell_config(const ExperimentConfig& cfg, int n, double p_test);

// Mean final-round utility of the learned model over one cell.
CellStats eval_model_cell(const ParameterSet& params, const ExperimentConfig& cfg, int n,
                          double p_test, int samples, ThreadPool* pool);

// Baseline over the same streams; method is wmmse, peak, random, or grid.
CellStats eval_baseline_cell(const ExperimentConfig& cfg, const std::string& method, int n,
                             double p_test, int samples, ThreadPool* pool);

// Mean utility per round on a fixed topology, channels and initial states
// resampled per sample.
std::vector<CellStats> trajectory_curve(const ParameterSet& params, const ExperimentConfig& cfg,
                                        const MultiplexNetwork& net, int samples, ThreadPool* pool);

// CSV writers (header row plus the config-hash comment line).
void write_eval_csv(const std::string& path, const ExperimentConfig& cfg,
                    const std::vector<std::tuple<int, double, std::string, CellStats>>& rows);
void write_trajectory_curve_csv(const std::string& path, const ExperimentConfig& cfg,
                                const std::vector<CellStats>& curve);
void write_train_log_csv(const std::string& path, const ExperimentConfig& cfg,
                         const std::vector<double>& train_objective,
                         const std::vector<double>& val_utility,
                         const std::vector<double>& seconds);

}  // namespace dmpnn
