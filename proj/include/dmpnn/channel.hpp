#pragma once

#include <span>
#include <vector>

#include "dmpnn/autodiff.hpp"
#include "dmpnn/multiplex.hpp"
#include "dmpnn/rng.hpp"

namespace dmpnn {

enum class Objective { kSumRate, kMinRate };

// Linear power gains for an N-pair interference channel; noise power is
// normalized to 1. cross[j*n+i] holds the gain from transmitter j to
// receiver i; only pairs on a physical edge contribute to rates.
struct ChannelRealization {
  int n = 0;
  std::vector<double> direct;  // gain of link i -> receiver i
  std::vector<double> cross;   // row-major ordered pairs, diagonal unused

  double gain(int j, int i) const { return cross[static_cast<size_t>(j) * n + i]; }
  double& gain(int j, int i) { return cross[static_cast<size_t>(j) * n + i]; }
};

// i.i.d. Exp(1) gains. Draw order: direct gains ascending i, then cross
// gains in lexicographic (j, i) order.
ChannelRealization sample_channels(int n, RngStream& rng);

// Relabels the realization: node i of the input becomes perm.map[i].
ChannelRealization permute(const ChannelRealization& chan, const Permutation& perm);

// Achievable rate of pair i in nats:
//   log(1 + a_ii x_i / (1 + sum over physical neighbors j of a_ji x_j)).
double rate(int i, const ChannelRealization& chan, std::span<const double> power,
            const MultiplexNetwork& net);
double sum_rate(const ChannelRealization& chan, std::span<const double> power,
                const MultiplexNetwork& net);
double min_rate(const ChannelRealization& chan, std::span<const double> power,
                const MultiplexNetwork& net);
// Index attaining the minimum rate, lowest index on ties.
int min_rate_index(const ChannelRealization& chan, std::span<const double> power,
                   const MultiplexNetwork& net);
double utility(Objective objective, const ChannelRealization& chan, std::span<const double> power,
               const MultiplexNetwork& net);

// Tape versions over per-node scalar power nodes. The rate is built as
// log(den + a_ii x_i) - log(den) so no division is needed; den >= 1 always.
ad::Var rate_node(ad::Graph& g, const ChannelRealization& chan, const MultiplexNetwork& net,
                  std::span<const ad::Var> power, int i);
ad::Var sum_rate_node(ad::Graph& g, const ChannelRealization& chan, const MultiplexNetwork& net,
                      std::span<const ad::Var> power);
ad::Var min_rate_node(ad::Graph& g, const ChannelRealization& chan, const MultiplexNetwork& net,
                      std::span<const ad::Var> power);
ad::Var utility_node(ad::Graph& g, Objective objective, const ChannelRealization& chan,
                     const MultiplexNetwork& net, std::span<const ad::Var> power);

}  // namespace dmpnn
