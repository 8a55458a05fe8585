#include "dmpnn/engine.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace dmpnn {

ad::Var masked_gain(ad::Graph& g, const ChannelRealization& chan, const MultiplexNetwork& net,
                    int j, int i, int cross_obs_dim) {
  if (j == i) throw std::invalid_argument("masked_gain: i and j must differ");
  Tensor t(cross_obs_dim, 1);
  if (net.physical_edge(j, i)) t.data[0] = chan.gain(j, i);
  return g.constant(t);
}

static void check_dims(const ParameterSet& params) {
  const OperatorDims& d = params.dims;
  if (params.message_net.in_dim() != d.state + d.cross_obs ||
      params.message_net.out_dim() != d.message ||
      params.combine_net.in_dim() != d.message + d.cross_obs ||
      params.combine_net.out_dim() != d.combined ||
      params.update_cell.input != d.combined + d.local_obs ||
      params.update_cell.hidden != d.state || params.decision_net.in_dim() != d.state ||
      params.decision_net.out_dim() != d.decision)
    throw std::invalid_argument("dmp: operator dimensions do not chain");
}

MessageSet generate_messages(ad::Graph& g, std::span<const ad::Var> states,
                             const ChannelRealization& chan, const MultiplexNetwork& net,
                             const ParameterSet& params) {
  const int n = net.size();
  MessageSet out;
  out.n = n;
  out.vars.assign(static_cast<size_t>(n) * n, ad::Var{});
  for (int i = 0; i < n; ++i) {
    for (int j : net.social_neighbors(i)) {
      ad::Var obs = masked_gain(g, chan, net, j, i, params.dims.cross_obs);
      const ad::Var parts[] = {states[i], obs};
      out.vars[static_cast<size_t>(i) * n + j] = fnn_apply(g, params.message_net, g.concat(parts));
    }
  }
  return out;
}

std::vector<ad::Var> combine_messages(ad::Graph& g, const MessageSet& messages,
                                      const ChannelRealization& chan, const MultiplexNetwork& net,
                                      const ParameterSet& params, int i) {
  std::vector<ad::Var> combined;
  combined.reserve(net.neighbors(i).size());
  for (int j : net.neighbors(i)) {
    ad::Var msg;
    if (net.social_edge(i, j)) {
      msg = messages.get(j, i);
    } else {
      msg = g.constant(Tensor::zeros(params.dims.message));
    }
    ad::Var obs = masked_gain(g, chan, net, j, i, params.dims.cross_obs);
    const ad::Var parts[] = {msg, obs};
    combined.push_back(fnn_apply(g, params.combine_net, g.concat(parts)));
  }
  return combined;
}

ad::Var aggregate(ad::Graph& g, std::span<const ad::Var> combined, int combined_dim) {
  return g.sum(combined, combined_dim, 1);
}

ad::Var update_state(ad::Graph& g, const ParameterSet& params, ad::Var prev_state,
                     ad::Var aggregated, ad::Var local_obs) {
  const ad::Var parts[] = {aggregated, local_obs};
  return gru_apply(g, params.update_cell, prev_state, g.concat(parts));
}

ad::Var decide(ad::Graph& g, const ParameterSet& params, ad::Var state) {
  return fnn_apply(g, params.decision_net, state);
}

DmpRollout unroll_dmp(ad::Graph& g, const MultiplexNetwork& net, const ChannelRealization& chan,
                      const ParameterSet& params, int iterations,
                      std::span<const Tensor> initial_states) {
  check_dims(params);
  const int n = net.size();
  if (iterations < 1) throw std::invalid_argument("unroll_dmp: need at least one iteration");
  if (static_cast<int>(initial_states.size()) != n)
    throw std::invalid_argument("unroll_dmp: one initial state per node required");
  for (const Tensor& s : initial_states)
    if (s.rows != params.dims.state || s.cols != 1)
      throw std::invalid_argument("unroll_dmp: initial state length mismatch");

  std::vector<ad::Var> local_obs(n);
  for (int i = 0; i < n; ++i) {
    Tensor t(params.dims.local_obs, 1);
    t.data[0] = chan.direct[i];
    local_obs[i] = g.constant(t);
  }

  std::vector<ad::Var> states;
  states.reserve(n);
  for (const Tensor& s : initial_states) states.push_back(g.constant(s));

  DmpRollout rollout;
  rollout.powers.reserve(iterations);
  rollout.states.reserve(iterations);
  for (int t = 0; t < iterations; ++t) {
    MessageSet messages = generate_messages(g, states, chan, net, params);
    std::vector<ad::Var> next_states(n);
    std::vector<ad::Var> powers(n);
    for (int i = 0; i < n; ++i) {
      std::vector<ad::Var> combined = combine_messages(g, messages, chan, net, params, i);
      ad::Var agg = aggregate(g, combined, params.dims.combined);
      next_states[i] = update_state(g, params, states[i], agg, local_obs[i]);
      powers[i] = decide(g, params, next_states[i]);
    }
    states = std::move(next_states);
    rollout.states.push_back(states);
    rollout.powers.push_back(std::move(powers));
  }
  return rollout;
}

std::vector<Tensor> draw_initial_states(int n, int state_dim, RngStream& rng) {
  std::vector<Tensor> states;
  states.reserve(n);
  for (int i = 0; i < n; ++i) {
    Tensor s(state_dim, 1);
    for (double& x : s.data) x = rng.gaussian();
    states.push_back(std::move(s));
  }
  return states;
}

Trajectory run_inference_with_states(const MultiplexNetwork& net, const ChannelRealization& chan,
                                     const ParameterSet& params, int iterations,
                                     std::span<const Tensor> initial_states) {
  ad::Graph g(&params.store);
  DmpRollout rollout = unroll_dmp(g, net, chan, params, iterations, initial_states);
  Trajectory traj;
  traj.powers.resize(iterations);
  for (int t = 0; t < iterations; ++t) {
    traj.powers[t].resize(net.size());
    for (int i = 0; i < net.size(); ++i) traj.powers[t][i] = g.scalar(rollout.powers[t][i]);
  }
  traj.final_states.reserve(net.size());
  for (int i = 0; i < net.size(); ++i) traj.final_states.push_back(g.value(rollout.states.back()[i]));
  return traj;
}

Trajectory run_inference(const MultiplexNetwork& net, const ChannelRealization& chan,
                         const ParameterSet& params, const DmpConfig& cfg, RngStream& state_rng) {
  std::vector<Tensor> states;
  switch (cfg.init) {
    case StateInit::kGaussian:
      states = draw_initial_states(net.size(), params.dims.state, state_rng);
      break;
    case StateInit::kZeros:
      states.assign(net.size(), Tensor::zeros(params.dims.state));
      break;
    case StateInit::kProvided:
      throw std::invalid_argument("run_inference: provided-state mode needs explicit states");
  }
  return run_inference_with_states(net, chan, params, cfg.iterations, states);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const ChannelRealization& chan, const MultiplexNetwork& net,
                          const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "t,node,x,r\n";
  char buf[64];
  for (size_t t = 0; t < traj.powers.size(); ++t) {
    for (int i = 0; i < net.size(); ++i) {
      const double r = rate(i, chan, traj.powers[t], net);
      std::snprintf(buf, sizeof(buf), "%zu,%d,%.10g,%.10g", t + 1, i + 1, traj.powers[t][i], r);
      out << buf << "\n";
    }
  }
}

}  // namespace dmpnn
