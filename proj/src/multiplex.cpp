#include "dmpnn/multiplex.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dmpnn {

static EdgeList normalize_edges(int n, EdgeList edges, const char* layer) {
  for (auto& [i, j] : edges) {
    if (i == j)
      throw std::invalid_argument(std::string("MultiplexNetwork: self-loop in ") + layer);
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw std::invalid_argument(std::string("MultiplexNetwork: node out of range in ") + layer);
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

MultiplexNetwork::MultiplexNetwork(int n, EdgeList physical, EdgeList social) : n_(n) {
  if (n < 1) throw std::invalid_argument("MultiplexNetwork: need at least one node");
  edges_p_ = normalize_edges(n, std::move(physical), "physical layer");
  edges_s_ = normalize_edges(n, std::move(social), "social layer");
  np_.assign(n, {});
  ns_.assign(n, {});
  nu_.assign(n, {});
  adj_p_.assign(static_cast<size_t>(n) * n, 0);
  adj_s_.assign(static_cast<size_t>(n) * n, 0);
  for (auto [i, j] : edges_p_) {
    np_[i].push_back(j);
    np_[j].push_back(i);
    adj_p_[static_cast<size_t>(i) * n + j] = 1;
    adj_p_[static_cast<size_t>(j) * n + i] = 1;
  }
  for (auto [i, j] : edges_s_) {
    ns_[i].push_back(j);
    ns_[j].push_back(i);
    adj_s_[static_cast<size_t>(i) * n + j] = 1;
    adj_s_[static_cast<size_t>(j) * n + i] = 1;
  }
  for (int i = 0; i < n; ++i) {
    std::sort(np_[i].begin(), np_[i].end());
    std::sort(ns_[i].begin(), ns_[i].end());
    nu_[i].resize(np_[i].size() + ns_[i].size());
    auto end = std::set_union(np_[i].begin(), np_[i].end(), ns_[i].begin(), ns_[i].end(),
                              nu_[i].begin());
    nu_[i].resize(end - nu_[i].begin());
  }
}

EdgeList complete_edges(int n) {
  if (n < 1) throw std::invalid_argument("complete_edges: need at least one node");
  EdgeList edges;
  edges.reserve(static_cast<size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return edges;
}

EdgeList erdos_renyi_edges(int n, double p, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("erdos_renyi_edges: need at least one node");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("erdos_renyi_edges: p outside [0,1]");
  EdgeList edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) edges.emplace_back(i, j);
  return edges;
}

Permutation::Permutation(std::vector<int> mapping) : map(std::move(mapping)) {
  const int n = static_cast<int>(map.size());
  inverse.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (map[i] < 0 || map[i] >= n || inverse[map[i]] != -1)
      throw std::invalid_argument("Permutation: mapping is not a bijection");
    inverse[map[i]] = i;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> m(n);
  for (int i = 0; i < n; ++i) m[i] = i;
  return Permutation(std::move(m));
}

Permutation Permutation::random(int n, RngStream& rng) {
  std::vector<int> m(n);
  for (int i = 0; i < n; ++i) m[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int k = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(i) + 1));
    std::swap(m[i], m[k]);
  }
  return Permutation(std::move(m));
}

MultiplexNetwork permute(const MultiplexNetwork& net, const Permutation& perm) {
  if (perm.size() != net.size())
    throw std::invalid_argument("permute: permutation size does not match network");
  EdgeList ep, es;
  ep.reserve(net.physical_edges().size());
  es.reserve(net.social_edges().size());
  for (auto [i, j] : net.physical_edges()) ep.emplace_back(perm.map[i], perm.map[j]);
  for (auto [i, j] : net.social_edges()) es.emplace_back(perm.map[i], perm.map[j]);
  return MultiplexNetwork(net.size(), std::move(ep), std::move(es));
}

std::vector<int> sample_subset(int population, int n, RngStream& rng) {
  if (n < 0 || n > population) throw std::invalid_argument("sample_subset: n outside [0, population]");
  std::vector<int> kept;
  kept.reserve(n);
  int needed = n;
  for (int i = 0; i < population && needed > 0; ++i) {
    const int remaining = population - i;
    if (rng.uniform01() * remaining < needed) {
      kept.push_back(i);
      --needed;
    }
  }
  return kept;
}

MultiplexNetwork sample_training_topology(const TopologyConfig& cfg, int n, RngStream& rng) {
  if (n < 1 || n > cfg.n_population)
    throw std::invalid_argument("sample_training_topology: n outside [1, population]");
  // The kept indices are relabeled 0..n-1 preserving order; edges are then
  // drawn over the relabeled nodes.
  sample_subset(cfg.n_population, n, rng);
  EdgeList ep = (cfg.p_physical >= 1.0) ? complete_edges(n) : erdos_renyi_edges(n, cfg.p_physical, rng);
  EdgeList es = erdos_renyi_edges(n, cfg.p_social, rng);
  return MultiplexNetwork(n, std::move(ep), std::move(es));
}

void write_graph_file(const std::string& path, const MultiplexNetwork& net) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_graph_file: cannot open " + path);
  out << net.size() << "\n";
  for (auto [i, j] : net.physical_edges()) out << "P " << i + 1 << " " << j + 1 << "\n";
  for (auto [i, j] : net.social_edges()) out << "S " << i + 1 << " " << j + 1 << "\n";
  if (!out) throw std::runtime_error("write_graph_file: write failed for " + path);
}

MultiplexNetwork read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_graph_file: cannot open " + path);
  int n = 0;
  if (!(in >> n) || n < 1) throw std::runtime_error("read_graph_file: bad node count in " + path);
  EdgeList ep, es;
  std::string layer;
  int i, j;
  while (in >> layer >> i >> j) {
    if (i < 1 || j < 1 || i > n || j > n)
      throw std::runtime_error("read_graph_file: node id out of range in " + path);
    if (layer == "P")
      ep.emplace_back(i - 1, j - 1);
    else if (layer == "S")
      es.emplace_back(i - 1, j - 1);
    else
      throw std::runtime_error("read_graph_file: unknown layer tag '" + layer + "' in " + path);
  }
  return MultiplexNetwork(n, std::move(ep), std::move(es));
}

}  // namespace dmpnn
