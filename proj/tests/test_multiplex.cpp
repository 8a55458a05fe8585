#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "dmpnn/multiplex.hpp"

using namespace dmpnn;

TEST_CASE("complete graphs have all pairs") {
  CHECK(complete_edges(1).empty());
  CHECK(complete_edges(3) == EdgeList{{0, 1}, {0, 2}, {1, 2}});
  CHECK(complete_edges(10).size() == 45);
  CHECK_THROWS_AS(complete_edges(0), std::invalid_argument);
}

TEST_CASE("edge probability endpoints give edgeless and complete graphs") {
  RngStream rng(1, "graphs");
  CHECK(erdos_renyi_edges(6, 0.0, rng).empty());
  CHECK(erdos_renyi_edges(6, 1.0, rng) == complete_edges(6));
  CHECK_THROWS_AS(erdos_renyi_edges(6, -0.1, rng), std::invalid_argument);
  CHECK_THROWS_AS(erdos_renyi_edges(6, 1.1, rng), std::invalid_argument);
}

TEST_CASE("edge counts match the binomial mean at p = 0.5") {
  const int n = 10, draws = 10000;
  const double pairs = 45.0;
  double total = 0.0;
  for (int k = 0; k < draws; ++k) {
    RngStream rng(17, "graphs", k);
    total += static_cast<double>(erdos_renyi_edges(n, 0.5, rng).size());
  }
  const double mean = total / draws;
  // Per-draw sigma is sqrt(45 * 0.25); 3 sigma of the mean at 1e4 draws.
  const double bound = 3.0 * std::sqrt(pairs * 0.25) / std::sqrt(static_cast<double>(draws));
  CHECK(std::abs(mean - pairs * 0.5) < bound);
}

TEST_CASE("same seed reproduces the same edges") {
  RngStream a(5, "graphs", 3);
  RngStream b(5, "graphs", 3);
  CHECK(erdos_renyi_edges(12, 0.4, a) == erdos_renyi_edges(12, 0.4, b));
}

TEST_CASE("neighborhoods are symmetric and self-loop free") {
  RngStream rng(9, "graphs");
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_int(8));
    MultiplexNetwork net(n, erdos_renyi_edges(n, 0.5, rng), erdos_renyi_edges(n, 0.4, rng));
    for (int i = 0; i < n; ++i) {
      for (int j : net.neighbors(i)) {
        CHECK(j != i);
        const auto& back = net.neighbors(j);
        CHECK(std::find(back.begin(), back.end(), i) != back.end());
      }
    }
  }
}

TEST_CASE("self-loops and bad nodes are rejected") {
  CHECK_THROWS_AS(MultiplexNetwork(3, {{0, 0}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(MultiplexNetwork(3, {{0, 3}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(MultiplexNetwork(0, {}, {}), std::invalid_argument);
}

TEST_CASE("subset decimation boundaries") {
  TopologyConfig cfg{10, 1.0, 1.0};
  RngStream rng(3, "graphs");
  MultiplexNetwork full = sample_training_topology(cfg, 10, rng);
  CHECK(full.size() == 10);
  CHECK(full.physical_edges().size() == 45);
  MultiplexNetwork small = sample_training_topology(cfg, 3, rng);
  CHECK(small.size() == 3);
  CHECK(small.social_edges() == complete_edges(3));  // p = 1
  CHECK_THROWS_AS(sample_training_topology(cfg, 11, rng), std::invalid_argument);
}

TEST_CASE("subsets are uniform and order preserving") {
  const int population = 6, keep = 3, draws = 20000;
  std::map<std::vector<int>, int> counts;
  for (int k = 0; k < draws; ++k) {
    RngStream rng(31, "graphs", k);
    std::vector<int> subset = sample_subset(population, keep, rng);
    REQUIRE(static_cast<int>(subset.size()) == keep);
    CHECK(std::is_sorted(subset.begin(), subset.end()));
    ++counts[subset];
  }
  const double combos = 20.0;  // C(6,3)
  CHECK(counts.size() == 20);
  const double expected = draws / combos;
  const double sigma = std::sqrt(draws * (1.0 / combos) * (1.0 - 1.0 / combos));
  for (const auto& [subset, count] : counts) CHECK(std::abs(count - expected) < 3.0 * sigma);
}

TEST_CASE("identity permutation keeps the network") {
  RngStream rng(7, "graphs");
  MultiplexNetwork net(5, erdos_renyi_edges(5, 0.6, rng), erdos_renyi_edges(5, 0.5, rng));
  MultiplexNetwork same = permute(net, Permutation::identity(5));
  CHECK(same.physical_edges() == net.physical_edges());
  CHECK(same.social_edges() == net.social_edges());
}

TEST_CASE("five-node relabeling maps a cycle onto the expected edges") {
  // Social cycle 1-2-3-4-5-1 (0-based below) relabeled by
  // 1->1, 2->3, 3->5, 4->2, 5->4 (1-based).
  MultiplexNetwork net(5, {}, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
  Permutation perm({0, 2, 4, 1, 3});
  MultiplexNetwork relabeled = permute(net, perm);
  const EdgeList expected = {{0, 2}, {0, 3}, {1, 3}, {1, 4}, {2, 4}};
  CHECK(relabeled.social_edges() == expected);
  CHECK(relabeled.physical_edges().empty());
}

TEST_CASE("permutation preserves cardinality and the degree multiset") {
  RngStream rng(13, "graphs");
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + static_cast<int>(rng.uniform_int(6));
    MultiplexNetwork net(n, erdos_renyi_edges(n, 0.5, rng), erdos_renyi_edges(n, 0.3, rng));
    Permutation perm = Permutation::random(n, rng);
    MultiplexNetwork out = permute(net, perm);
    CHECK(out.physical_edges().size() == net.physical_edges().size());
    CHECK(out.social_edges().size() == net.social_edges().size());
    std::vector<size_t> da, db;
    for (int i = 0; i < n; ++i) {
      da.push_back(net.social_neighbors(i).size());
      db.push_back(out.social_neighbors(i).size());
    }
    std::sort(da.begin(), da.end());
    std::sort(db.begin(), db.end());
    CHECK(da == db);
  }
}

TEST_CASE("non-bijective permutations are rejected") {
  CHECK_THROWS_AS(Permutation({0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Permutation({0, 1, 3}), std::invalid_argument);
}

TEST_CASE("graph files round-trip") {
  RngStream rng(19, "graphs");
  MultiplexNetwork net(6, erdos_renyi_edges(6, 0.5, rng), erdos_renyi_edges(6, 0.4, rng));
  const std::string path = (std::filesystem::temp_directory_path() / "dmpnn_graph.txt").string();
  write_graph_file(path, net);
  MultiplexNetwork back = read_graph_file(path);
  CHECK(back.size() == net.size());
  CHECK(back.physical_edges() == net.physical_edges());
  CHECK(back.social_edges() == net.social_edges());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_graph_file("/nonexistent/graph.txt"), std::runtime_error);
}
