#pragma once

#include <span>
#include <string>
#include <vector>

#include "dmpnn/autodiff.hpp"
#include "dmpnn/channel.hpp"
#include "dmpnn/multiplex.hpp"
#include "dmpnn/nets.hpp"

namespace dmpnn {

enum class StateInit { kGaussian, kZeros, kProvided };

struct DmpConfig {
  int iterations = 10;  // number of message-passing rounds
  StateInit init = StateInit::kGaussian;
};

// Tape handles produced by one unrolled run: powers[t][i] and states[t][i]
// for t = 0..T-1 (iteration t+1).
struct DmpRollout {
  std::vector<std::vector<ad::Var>> powers;
  std::vector<std::vector<ad::Var>> states;
};

// Directed messages of one iteration; get(i, j) is the message i -> j and is
// only valid when (i, j) is a social edge.
struct MessageSet {
  int n = 0;
  std::vector<ad::Var> vars;  // n*n slots, invalid where no edge
  ad::Var get(int i, int j) const { return vars[static_cast<size_t>(i) * n + j]; }
};

// Masked cross observation: the gain constant a_ji when (j, i) is a physical
// edge, the zero vector otherwise.
ad::Var masked_gain(ad::Graph& g, const ChannelRealization& chan, const MultiplexNetwork& net,
                    int j, int i, int cross_obs_dim);

// One message per directed social pair: message(i -> j) encodes the sender
// state and what i observes about j.
MessageSet generate_messages(ad::Graph& g, std::span<const ad::Var> states,
                             const ChannelRealization& chan, const MultiplexNetwork& net,
                             const ParameterSet& params);

// Combined per-neighbor features for node i, ascending j over the union
// neighborhood. Missing messages / observations enter as zero vectors.
std::vector<ad::Var> combine_messages(ad::Graph& g, const MessageSet& messages,
                                      const ChannelRealization& chan, const MultiplexNetwork& net,
                                      const ParameterSet& params, int i);

// Sum of the combined features in ascending-neighbor order; the empty
// neighborhood aggregates to the zero vector.
ad::Var aggregate(ad::Graph& g, std::span<const ad::Var> combined, int combined_dim);

ad::Var update_state(ad::Graph& g, const ParameterSet& params, ad::Var prev_state,
                     ad::Var aggregated, ad::Var local_obs);

ad::Var decide(ad::Graph& g, const ParameterSet& params, ad::Var state);

// Unrolls the full loop (generation, combination, aggregation, update,
// decision) for the given iteration count on an existing tape.
DmpRollout unroll_dmp(ad::Graph& g, const MultiplexNetwork& net, const ChannelRealization& chan,
                      const ParameterSet& params, int iterations,
                      std::span<const Tensor> initial_states);

// Initial states drawn node by node in ascending index order.
std::vector<Tensor> draw_initial_states(int n, int state_dim, RngStream& rng);

struct Trajectory {
  std::vector<std::vector<double>> powers;  // [t][i], t = 0 is iteration 1
  std::vector<Tensor> final_states;
};

Trajectory run_inference(const MultiplexNetwork& net, const ChannelRealization& chan,
                         const ParameterSet& params, const DmpConfig& cfg, RngStream& state_rng);
Trajectory run_inference_with_states(const MultiplexNetwork& net, const ChannelRealization& chan,
                                     const ParameterSet& params, int iterations,
                                     std::span<const Tensor> initial_states);

// CSV with columns t,node,x,r (1-based t and node).
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const ChannelRealization& chan, const MultiplexNetwork& net,
                          const std::string& comment);

}  // namespace dmpnn
