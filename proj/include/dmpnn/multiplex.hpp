#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dmpnn/rng.hpp"

namespace dmpnn {

using EdgeList = std::vector<std::pair<int, int>>;  // unordered pairs, 0-based

// Two-layer multiplex network over one node set: physical edges model
// interference, social edges model backhaul connectivity. Nodes are 0..n-1
// internally; the text file format is 1-based.
class MultiplexNetwork {
 public:
  MultiplexNetwork(int n, EdgeList physical, EdgeList social);

  int size() const { return n_; }
  const std::vector<int>& physical_neighbors(int i) const { return np_[i]; }
  const std::vector<int>& social_neighbors(int i) const { return ns_[i]; }
  // Union of physical and social neighbors, sorted ascending.
  const std::vector<int>& neighbors(int i) const { return nu_[i]; }
  bool physical_edge(int i, int j) const { return adj_p_[static_cast<size_t>(i) * n_ + j]; }
  bool social_edge(int i, int j) const { return adj_s_[static_cast<size_t>(i) * n_ + j]; }
  const EdgeList& physical_edges() const { return edges_p_; }
  const EdgeList& social_edges() const { return edges_s_; }

 private:
  int n_ = 0;
  EdgeList edges_p_, edges_s_;
  std::vector<std::vector<int>> np_, ns_, nu_;
  std::vector<char> adj_p_, adj_s_;
};

EdgeList complete_edges(int n);
// Each pair (i, j), i < j, drawn in lexicographic order with one Bernoulli(p)
// draw per pair.
EdgeList erdos_renyi_edges(int n, double p, RngStream& rng);

struct Permutation {
  std::vector<int> map;      // map[i] = new index of node i
  std::vector<int> inverse;  // inverse[map[i]] = i
  explicit Permutation(std::vector<int> mapping);
  static Permutation identity(int n);
  static Permutation random(int n, RngStream& rng);
  int size() const { return static_cast<int>(map.size()); }
};

// Relabels both layers: edge (i, j) maps to (map[i], map[j]).
MultiplexNetwork permute(const MultiplexNetwork& net, const Permutation& perm);

struct TopologyConfig {
  int n_population = 10;      // pool size before decimation
  double p_physical = 1.0;    // 1.0 gives a complete physical layer
  double p_social = 0.7;
};

// Uniformly random n-subset of {0..population-1}, returned ascending; one
// uniform draw per population slot (selection sampling).
std::vector<int> sample_subset(int population, int n, RngStream& rng);

// Keeps a uniformly random n-subset of the population (relabeled 0..n-1
// preserving order), then draws the physical and social layers. Draw order:
// subset, physical edges, social edges.
MultiplexNetwork sample_training_topology(const TopologyConfig& cfg, int n, RngStream& rng);

// Text format: first line N, then one line per edge, "P i j" or "S i j",
// 1-based node ids.
void write_graph_file(const std::string& path, const MultiplexNetwork& net);
MultiplexNetwork read_graph_file(const std::string& path);

}  // namespace dmpnn
