#pragma once

#include <span>
#include <string>
#include <vector>

#include "dmpnn/autodiff.hpp"
#include "dmpnn/params.hpp"
#include "dmpnn/rng.hpp"

namespace dmpnn {

enum class Activation { kRelu, kScaledSigmoid, kLinear };

struct FnnLayer {
  int w = -1;  // ParamStore entry ids
  int b = -1;
  Activation act = Activation::kRelu;
  int in = 0;
  int out = 0;
};

// Fully-connected network whose weights live in a ParamStore.
struct FeedForwardNet {
  std::vector<FnnLayer> layers;
  double output_scale = 1.0;  // scale of the scaled-sigmoid head
  int in_dim() const { return layers.empty() ? 0 : layers.front().in; }
  int out_dim() const { return layers.empty() ? 0 : layers.back().out; }
};

// Single GRU cell: update gate, reset gate, candidate state.
struct GruCell {
  int wz = -1, bz = -1;
  int wr = -1, br = -1;
  int wh = -1, bh = -1;
  int hidden = 0;
  int input = 0;
};

// Operator dimensions for the four trainable blocks.
struct OperatorDims {
  int state = 50;     // state vector length per node
  int message = 10;   // message payload length
  int combined = 50;  // combined-message length
  int decision = 1;   // decision output length per node
  int local_obs = 1;  // own-observation length
  int cross_obs = 1;  // cross-observation length
  int hidden = 100;   // FNN hidden width
  int layers = 3;     // affine layers per FNN
  double power_max = 10.0;

  bool operator==(const OperatorDims&) const = default;
};

// The four trainable operator blocks over one flat store.
struct ParameterSet {
  OperatorDims dims;
  ParamStore store;
  FeedForwardNet message_net;   // state+cross_obs -> message
  FeedForwardNet combine_net;   // message+cross_obs -> combined
  GruCell update_cell;          // input combined+local_obs, hidden state
  FeedForwardNet decision_net;  // state -> decision, output in (0, power_max)
};

// Builders. make_fnn chains dims = {in, hidden..., out}; hidden layers use
// hidden_act, the last layer out_act.
FeedForwardNet make_fnn(ParamStore& store, const std::string& prefix, std::span<const int> dims,
                        Activation hidden_act, Activation out_act, double output_scale = 1.0);
GruCell make_gru(ParamStore& store, const std::string& prefix, int input, int hidden);

// Fills one weight entry with the symmetric uniform fan init
// [-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))], row-major order.
void init_weight_uniform(ParamStore& store, int entry, int fan_in, int fan_out, RngStream& rng);

// Builds the four operator blocks and initializes weights from the "init"
// substream of the seed; biases stay zero.
ParameterSet init_params(const OperatorDims& dims, uint64_t seed);

// Tape application.
ad::Var fnn_apply(ad::Graph& g, const FeedForwardNet& net, ad::Var z);
ad::Var gru_apply(ad::Graph& g, const GruCell& cell, ad::Var hidden, ad::Var input);

// Adam with bias correction, applied as gradient ascent.
struct AdamState {
  std::vector<double> m, v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-4;
  AdamState(size_t n, double lr) : m(n, 0.0), v(n, 0.0), learning_rate(lr) {}
};

void adam_ascend(AdamState& state, ParamStore& params, std::span<const double> grad);

// Text checkpoint: "DMPNN1" header, then one named tensor per block
// ("tensor <name> <rows> <cols>" followed by row-major values). A "_meta"
// tensor records the operator dimensions so the file is self-describing.
void save_checkpoint(const std::string& path, const ParameterSet& params);
ParameterSet load_checkpoint(const std::string& path);

}  // namespace dmpnn
