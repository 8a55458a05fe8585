#pragma once

#include <vector>

#include "dmpnn/channel.hpp"
#include "dmpnn/multiplex.hpp"
#include "dmpnn/rng.hpp"

namespace dmpnn {

struct WmmseConfig {
  int max_iterations = 500;
  double tolerance = 1e-6;  // stop when the sum-rate change drops below this
};

struct WmmseResult {
  std::vector<double> power;
  std::vector<double> sum_rate_trace;  // sum rate after each iteration
  int iterations = 0;
};

// Scalar weighted-MMSE power control. Iterates over amplitudes v_i in
// [0, sqrt(P)] with x_i = v_i^2, starting from full power:
//   u_i = sqrt(a_ii) v_i / (1 + a_ii v_i^2 + sum_{j in Np(i)} a_ji v_j^2)
//   w_i = 1 / (1 - u_i sqrt(a_ii) v_i)
//   v_i = w_i u_i sqrt(a_ii) / (w_i u_i^2 a_ii + sum_{j: i in Np(j)} w_j u_j^2 a_ij)
// and stops when the sum rate changes by less than the tolerance.
WmmseResult wmmse(const ChannelRealization& chan, const MultiplexNetwork& net, double power_max,
                  const WmmseConfig& cfg = {});

std::vector<double> peak_power(int n, double power_max);
// i.i.d. uniform on [0, P].
std::vector<double> random_power(int n, double power_max, RngStream& rng);

struct GridOracleResult {
  std::vector<double> power;
  double value = 0.0;
};

// Exhaustive search over the grid {0, P/(G-1), ..., P}^N. Ties resolve to
// the lexicographically smallest power vector. Cost G^N; rejected for N > 4.
GridOracleResult grid_oracle(const ChannelRealization& chan, const MultiplexNetwork& net,
                             double power_max, Objective objective, int grid_points);

}  // namespace dmpnn
