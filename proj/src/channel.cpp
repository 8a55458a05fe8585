#include "dmpnn/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace dmpnn {

ChannelRealization sample_channels(int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_channels: need at least one pair");
  ChannelRealization chan;
  chan.n = n;
  chan.direct.resize(n);
  chan.cross.assign(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) chan.direct[i] = rng.exponential();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (j != i) chan.gain(j, i) = rng.exponential();
  return chan;
}

ChannelRealization permute(const ChannelRealization& chan, const Permutation& perm) {
  if (perm.size() != chan.n) throw std::invalid_argument("permute: size mismatch");
  ChannelRealization out;
  out.n = chan.n;
  out.direct.resize(chan.n);
  out.cross.assign(chan.cross.size(), 0.0);
  for (int i = 0; i < chan.n; ++i) out.direct[perm.map[i]] = chan.direct[i];
  for (int j = 0; j < chan.n; ++j)
    for (int i = 0; i < chan.n; ++i)
      if (j != i) out.gain(perm.map[j], perm.map[i]) = chan.gain(j, i);
  return out;
}

double rate(int i, const ChannelRealization& chan, std::span<const double> power,
            const MultiplexNetwork& net) {
  double interference = 0.0;
  for (int j : net.physical_neighbors(i)) interference += chan.gain(j, i) * power[j];
  return std::log(1.0 + chan.direct[i] * power[i] / (1.0 + interference));
}

double sum_rate(const ChannelRealization& chan, std::span<const double> power,
                const MultiplexNetwork& net) {
  double s = 0.0;
  for (int i = 0; i < chan.n; ++i) s += rate(i, chan, power, net);
  return s;
}

double min_rate(const ChannelRealization& chan, std::span<const double> power,
                const MultiplexNetwork& net) {
  return rate(min_rate_index(chan, power, net), chan, power, net);
}

int min_rate_index(const ChannelRealization& chan, std::span<const double> power,
                   const MultiplexNetwork& net) {
  int arg = 0;
  double best = rate(0, chan, power, net);
  for (int i = 1; i < chan.n; ++i) {
    const double r = rate(i, chan, power, net);
    if (r < best) {
      best = r;
      arg = i;
    }
  }
  return arg;
}

double utility(Objective objective, const ChannelRealization& chan, std::span<const double> power,
               const MultiplexNetwork& net) {
  return objective == Objective::kSumRate ? sum_rate(chan, power, net)
                                          : min_rate(chan, power, net);
}

ad::Var rate_node(ad::Graph& g, const ChannelRealization& chan, const MultiplexNetwork& net,
                  std::span<const ad::Var> power, int i) {
  std::vector<ad::Var> terms;
  terms.reserve(net.physical_neighbors(i).size() + 1);
  terms.push_back(g.scalar_constant(1.0));
  for (int j : net.physical_neighbors(i))
    terms.push_back(g.scale_shift(power[j], chan.gain(j, i)));
  ad::Var den = g.sum(terms, 1, 1);
  terms.push_back(g.scale_shift(power[i], chan.direct[i]));
  ad::Var num = g.sum(terms, 1, 1);
  ad::Var diff_parts[] = {g.log(num), g.scale_shift(g.log(den), -1.0)};
  return g.sum(diff_parts, 1, 1);
}

ad::Var sum_rate_node(ad::Graph& g, const ChannelRealization& chan, const MultiplexNetwork& net,
                      std::span<const ad::Var> power) {
  std::vector<ad::Var> rates;
  rates.reserve(chan.n);
  for (int i = 0; i < chan.n; ++i) rates.push_back(rate_node(g, chan, net, power, i));
  return g.sum(rates, 1, 1);
}

ad::Var min_rate_node(ad::Graph& g, const ChannelRealization& chan, const MultiplexNetwork& net,
                      std::span<const ad::Var> power) {
  std::vector<ad::Var> rates;
  rates.reserve(chan.n);
  for (int i = 0; i < chan.n; ++i) rates.push_back(rate_node(g, chan, net, power, i));
  return g.min_entries(g.concat(rates));
}

ad::Var utility_node(ad::Graph& g, Objective objective, const ChannelRealization& chan,
                     const MultiplexNetwork& net, std::span<const ad::Var> power) {
  return objective == Objective::kSumRate ? sum_rate_node(g, chan, net, power)
                                          : min_rate_node(g, chan, net, power);
}

}  // namespace dmpnn
