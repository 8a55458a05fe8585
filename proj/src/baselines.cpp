#include "dmpnn/baselines.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dmpnn {

WmmseResult wmmse(const ChannelRealization& chan, const MultiplexNetwork& net, double power_max,
                  const WmmseConfig& cfg) {
  if (cfg.tolerance <= 0.0) throw std::invalid_argument("wmmse: tolerance must be positive");
  const int n = chan.n;
  const double vmax = std::sqrt(power_max);
  std::vector<double> v(n, vmax), u(n), w(n), x(n);
  WmmseResult result;
  double prev_rate = 0.0;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    for (int i = 0; i < n; ++i) {
      double rx_power = 1.0 + chan.direct[i] * v[i] * v[i];
      for (int j : net.physical_neighbors(i)) rx_power += chan.gain(j, i) * v[j] * v[j];
      u[i] = std::sqrt(chan.direct[i]) * v[i] / rx_power;
    }
    for (int i = 0; i < n; ++i) w[i] = 1.0 / (1.0 - u[i] * std::sqrt(chan.direct[i]) * v[i]);
    for (int i = 0; i < n; ++i) {
      double den = w[i] * u[i] * u[i] * chan.direct[i];
      for (int j : net.physical_neighbors(i)) den += w[j] * u[j] * u[j] * chan.gain(i, j);
      double vi = w[i] * u[i] * std::sqrt(chan.direct[i]) / den;
      v[i] = std::min(std::max(vi, 0.0), vmax);
      if (!std::isfinite(v[i])) {
        std::ostringstream oss;
        oss << "wmmse: non-finite amplitude at iteration " << iter << ", node " << i
            << " (a_ii=" << chan.direct[i] << ")";
        throw std::runtime_error(oss.str());
      }
    }
    for (int i = 0; i < n; ++i) x[i] = v[i] * v[i];
    const double current = sum_rate(chan, x, net);
    result.sum_rate_trace.push_back(current);
    result.iterations = iter + 1;
    if (iter > 0 && std::abs(current - prev_rate) < cfg.tolerance) break;
    prev_rate = current;
  }
  result.power = std::move(x);
  return result;
}

std::vector<double> peak_power(int n, double power_max) {
  return std::vector<double>(n, power_max);
}

std::vector<double> random_power(int n, double power_max, RngStream& rng) {
  std::vector<double> x(n);
  for (double& xi : x) xi = rng.uniform(0.0, power_max);
  return x;
}

GridOracleResult grid_oracle(const ChannelRealization& chan, const MultiplexNetwork& net,
                             double power_max, Objective objective, int grid_points) {
  const int n = chan.n;
  if (n > 4) throw std::invalid_argument("grid_oracle: N > 4 is too costly");
  if (grid_points < 2) throw std::invalid_argument("grid_oracle: need at least two grid points");

  std::vector<double> levels(grid_points);
  for (int k = 0; k < grid_points; ++k)
    levels[k] = power_max * static_cast<double>(k) / (grid_points - 1);

  std::vector<int> idx(n, 0);
  std::vector<double> x(n, levels[0]);
  GridOracleResult best;
  best.power = x;
  best.value = utility(objective, chan, x, net);
  // Odometer enumeration in lexicographic order; strict improvement keeps
  // the first (lexicographically smallest) maximizer.
  while (true) {
    int d = n - 1;
    while (d >= 0 && idx[d] == grid_points - 1) {
      idx[d] = 0;
      x[d] = levels[0];
      --d;
    }
    if (d < 0) break;
    ++idx[d];
    x[d] = levels[idx[d]];
    const double value = utility(objective, chan, x, net);
    if (value > best.value) {
      best.value = value;
      best.power = x;
    }
  }
  return best;
}

}  // namespace dmpnn
