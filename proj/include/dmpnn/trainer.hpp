#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dmpnn/baselines.hpp"
#include "dmpnn/channel.hpp"
#include "dmpnn/engine.hpp"
#include "dmpnn/multiplex.hpp"
#include "dmpnn/nets.hpp"
#include "dmpnn/threadpool.hpp"

namespace dmpnn {

struct TrainConfig {
  Objective objective = Objective::kSumRate;
  OperatorDims dims;
  int iterations = 10;  // unrolled rounds per sample
  int n_min = 3;
  int n_max = 5;
  int n_population = 10;
  double p_train = 0.7;
  double p_physical = 1.0;
  int batch_size = 256;
  int epochs = 200;
  int batches_per_epoch = 20;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int val_samples = 256;
  uint64_t seed = 1;
  int threads = 0;  // 0 -> hardware concurrency

  void validate() const;  // throws on out-of-range fields
  bool operator==(const TrainConfig&) const = default;
};

struct TrainReport {
  std::vector<double> train_objective;  // per epoch, batch-mean weighted objective
  std::vector<double> val_utility;      // per epoch, mean final-round utility
  double seconds = 0.0;
};

struct TrainOutput {
  ParameterSet params;
  TrainReport report;
};

struct Sample {
  MultiplexNetwork net;
  ChannelRealization chan;
};

// One independent training tuple. Substreams are derived from the config
// seed as "graphs.<tag>", "channels.<tag>" and the per-sample index, so any
// source can be frozen independently and baselines can pair exactly.
Sample draw_sample(const TrainConfig& cfg, std::string_view tag, uint64_t index);
// The tuples of one mini-batch: indices [first_index, first_index + count).
std::vector<Sample> sample_minibatch(const TrainConfig& cfg, std::string_view tag,
                                     uint64_t first_index, int count);
std::vector<Tensor> draw_sample_states(const TrainConfig& cfg, std::string_view tag, uint64_t index,
                                       int n);

// Sum over rounds of sqrt(t) times the round utility, t = 1..T.
double weighted_objective(const Trajectory& traj, const ChannelRealization& chan,
                          const MultiplexNetwork& net, Objective objective);
ad::Var weighted_objective_node(ad::Graph& g, const DmpRollout& rollout,
                                const ChannelRealization& chan, const MultiplexNetwork& net,
                                Objective objective);

class TrainDivergence : public std::runtime_error {
 public:
  TrainDivergence(const std::string& msg, uint64_t sample_index)
      : std::runtime_error(msg), sample_index(sample_index) {}
  uint64_t sample_index;
};

struct BatchEval {
  double mean_objective = 0.0;
  std::vector<double> grad;  // mean gradient, ParamStore layout; empty without grads
};

// Evaluates count samples starting at first_index. Samples are processed in
// fixed blocks of 16 and reduced in ascending block order, so the result is
// bit-identical for any thread count.
BatchEval evaluate_batch(const ParameterSet& params, const TrainConfig& cfg, std::string_view tag,
                         uint64_t first_index, int count, bool with_grads, ThreadPool* pool);

// Final-round utility of each sample in a fixed range.
std::vector<double> per_sample_utilities(const ParameterSet& params, const TrainConfig& cfg,
                                         std::string_view tag, uint64_t first_index, int count,
                                         ThreadPool* pool);
// Mean final-round utility over a fixed sample range (used for validation).
double evaluate_utility(const ParameterSet& params, const TrainConfig& cfg, std::string_view tag,
                        uint64_t first_index, int count, ThreadPool* pool);

using EpochCallback =
    std::function<void(int epoch, double train_objective, double val_utility, double seconds)>;

// Mini-batch Adam ascent on the weighted objective over freshly sampled
// (channel, N, social graph) tuples; per-epoch validation on a fixed set.
TrainOutput train(const TrainConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace dmpnn
