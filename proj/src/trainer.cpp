#include "dmpnn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace dmpnn {

namespace {
constexpr int kGradBlock = 16;  // fixed reduction block; keeps results thread-count independent

std::string stream_name(std::string_view kind, std::string_view tag) {
  std::string s(kind);
  s += ".";
  s += tag;
  return s;
}
}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (epochs < 0 || batches_per_epoch < 1)
    throw std::invalid_argument("TrainConfig: bad epoch/batch counts");
  if (p_train < 0.0 || p_train > 1.0) throw std::invalid_argument("TrainConfig: p_train outside [0,1]");
  if (p_physical < 0.0 || p_physical > 1.0)
    throw std::invalid_argument("TrainConfig: p_physical outside [0,1]");
  if (n_min < 1 || n_min > n_max || n_max > n_population)
    throw std::invalid_argument("TrainConfig: need 1 <= n_min <= n_max <= n_population");
  if (iterations < 1) throw std::invalid_argument("TrainConfig: iterations must be >= 1");
  if (val_samples < 0) throw std::invalid_argument("TrainConfig: val_samples must be >= 0");
  if (learning_rate < 0.0) throw std::invalid_argument("TrainConfig: negative learning rate");
}

Sample draw_sample(const TrainConfig& cfg, std::string_view tag, uint64_t index) {
  RngStream graph_rng(cfg.seed, stream_name("graphs", tag), index);
  const int span = cfg.n_max - cfg.n_min + 1;
  const int n = cfg.n_min + static_cast<int>(graph_rng.uniform_int(static_cast<uint64_t>(span)));
  TopologyConfig topo{cfg.n_population, cfg.p_physical, cfg.p_train};
  MultiplexNetwork net = sample_training_topology(topo, n, graph_rng);
  RngStream chan_rng(cfg.seed, stream_name("channels", tag), index);
  ChannelRealization chan = sample_channels(n, chan_rng);
  return Sample{std::move(net), std::move(chan)};
}

std::vector<Sample> sample_minibatch(const TrainConfig& cfg, std::string_view tag,
                                     uint64_t first_index, int count) {
  std::vector<Sample> batch;
  batch.reserve(count);
  for (int k = 0; k < count; ++k) batch.push_back(draw_sample(cfg, tag, first_index + k));
  return batch;
}

std::vector<Tensor> draw_sample_states(const TrainConfig& cfg, std::string_view tag, uint64_t index,
                                       int n) {
  RngStream state_rng(cfg.seed, stream_name("states", tag), index);
  return draw_initial_states(n, cfg.dims.state, state_rng);
}

double weighted_objective(const Trajectory& traj, const ChannelRealization& chan,
                          const MultiplexNetwork& net, Objective objective) {
  double total = 0.0;
  for (size_t t = 0; t < traj.powers.size(); ++t)
    total += std::sqrt(static_cast<double>(t + 1)) * utility(objective, chan, traj.powers[t], net);
  return total;
}

ad::Var weighted_objective_node(ad::Graph& g, const DmpRollout& rollout,
                                const ChannelRealization& chan, const MultiplexNetwork& net,
                                Objective objective) {
  std::vector<ad::Var> terms;
  terms.reserve(rollout.powers.size());
  for (size_t t = 0; t < rollout.powers.size(); ++t) {
    ad::Var u = utility_node(g, objective, chan, net, rollout.powers[t]);
    terms.push_back(g.scale_shift(u, std::sqrt(static_cast<double>(t + 1))));
  }
  return g.sum(terms, 1, 1);
}

namespace {

struct BlockResult {
  double objective_sum = 0.0;
  std::vector<double> grad;
  bool diverged = false;
  uint64_t bad_index = 0;
};

// Evaluates samples [first, first+count) of one block serially in ascending
// order, accumulating objective and (optionally) gradients.
void eval_block(const ParameterSet& params, const TrainConfig& cfg, std::string_view tag,
                uint64_t first, int count, bool with_grads, ad::Graph& g, BlockResult& out) {
  if (with_grads) out.grad.assign(params.store.size(), 0.0);
  for (int k = 0; k < count; ++k) {
    const uint64_t index = first + k;
    Sample sample = draw_sample(cfg, tag, index);
    std::vector<Tensor> states = draw_sample_states(cfg, tag, index, sample.net.size());
    g.reset(&params.store);
    DmpRollout rollout = unroll_dmp(g, sample.net, sample.chan, params, cfg.iterations, states);
    ad::Var objective = weighted_objective_node(g, rollout, sample.chan, sample.net, cfg.objective);
    const double value = g.scalar(objective);
    if (!std::isfinite(value)) {
      out.diverged = true;
      out.bad_index = index;
      return;
    }
    out.objective_sum += value;
    if (with_grads) {
      g.backward(objective);
      g.add_param_grads(out.grad);
    }
  }
}

}  // namespace

BatchEval evaluate_batch(const ParameterSet& params, const TrainConfig& cfg, std::string_view tag,
                         uint64_t first_index, int count, bool with_grads, ThreadPool* pool) {
  const int blocks = (count + kGradBlock - 1) / kGradBlock;
  std::vector<BlockResult> results(blocks);
  auto task = [&](int b) {
    thread_local ad::Graph graph;
    const uint64_t first = first_index + static_cast<uint64_t>(b) * kGradBlock;
    const int n = std::min(kGradBlock, count - b * kGradBlock);
    eval_block(params, cfg, tag, first, n, with_grads, graph, results[b]);
  };
  if (pool) {
    pool->run(blocks, task);
  } else {
    for (int b = 0; b < blocks; ++b) task(b);
  }

  BatchEval out;
  if (with_grads) out.grad.assign(params.store.size(), 0.0);
  double sum = 0.0;
  for (int b = 0; b < blocks; ++b) {
    const BlockResult& r = results[b];
    if (r.diverged) {
      std::ostringstream oss;
      oss << "training objective is not finite (stream tag " << tag << ", sample " << r.bad_index
          << ")";
      throw TrainDivergence(oss.str(), r.bad_index);
    }
    sum += r.objective_sum;
    if (with_grads)
      for (size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += r.grad[i];
  }
  out.mean_objective = sum / count;
  if (with_grads)
    for (double& gi : out.grad) gi /= count;
  return out;
}

std::vector<double> per_sample_utilities(const ParameterSet& params, const TrainConfig& cfg,
                                         std::string_view tag, uint64_t first_index, int count,
                                         ThreadPool* pool) {
  std::vector<double> values(count);
  auto task = [&](int k) {
    const uint64_t index = first_index + k;
    Sample sample = draw_sample(cfg, tag, index);
    std::vector<Tensor> states = draw_sample_states(cfg, tag, index, sample.net.size());
    Trajectory traj =
        run_inference_with_states(sample.net, sample.chan, params, cfg.iterations, states);
    values[k] = utility(cfg.objective, sample.chan, traj.powers.back(), sample.net);
  };
  if (pool) {
    pool->run(count, task);
  } else {
    for (int k = 0; k < count; ++k) task(k);
  }
  return values;
}

double evaluate_utility(const ParameterSet& params, const TrainConfig& cfg, std::string_view tag,
                        uint64_t first_index, int count, ThreadPool* pool) {
  std::vector<double> values = per_sample_utilities(params, cfg, tag, first_index, count, pool);
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / count;
}

TrainOutput train(const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ParameterSet params = init_params(cfg.dims, cfg.seed);
  AdamState adam(params.store.size(), cfg.learning_rate);
  adam.beta1 = cfg.adam_beta1;
  adam.beta2 = cfg.adam_beta2;
  adam.epsilon = cfg.adam_epsilon;

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  ThreadPool pool(threads);

  TrainReport report;
  report.train_objective.reserve(cfg.epochs);
  report.val_utility.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double epoch_objective = 0.0;
    for (int batch = 0; batch < cfg.batches_per_epoch; ++batch) {
      const uint64_t first =
          (static_cast<uint64_t>(epoch) * cfg.batches_per_epoch + batch) * cfg.batch_size;
      BatchEval be;
      try {
        be = evaluate_batch(params, cfg, "train", first, cfg.batch_size, true, &pool);
      } catch (const TrainDivergence& e) {
        std::ostringstream oss;
        oss << e.what() << " at epoch " << epoch << ", batch " << batch;
        throw TrainDivergence(oss.str(), e.sample_index);
      }
      adam_ascend(adam, params.store, be.grad);
      epoch_objective += be.mean_objective;
    }
    report.train_objective.push_back(epoch_objective / cfg.batches_per_epoch);
    const double val = cfg.val_samples > 0
                           ? evaluate_utility(params, cfg, "val", 0, cfg.val_samples, &pool)
                           : 0.0;
    report.val_utility.push_back(val);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_epoch) on_epoch(epoch, report.train_objective.back(), val, elapsed);
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return TrainOutput{std::move(params), std::move(report)};
}

}  // namespace dmpnn
