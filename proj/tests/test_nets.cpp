#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "dmpnn/nets.hpp"

using namespace dmpnn;
using ad::Graph;
using ad::Var;

namespace {

Tensor fnn_eval(const ParameterSet& p, const FeedForwardNet& net, const Tensor& z) {
  Graph g(&p.store);
  return g.value(fnn_apply(g, net, g.constant(z)));
}

OperatorDims tiny_dims() {
  OperatorDims d;
  d.state = 4;
  d.message = 3;
  d.combined = 3;
  d.decision = 1;
  d.hidden = 6;
  d.layers = 3;
  d.power_max = 10.0;
  return d;
}

}  // namespace

TEST_CASE("init is deterministic under the seed and biases are zero") {
  ParameterSet a = init_params(tiny_dims(), 99);
  ParameterSet b = init_params(tiny_dims(), 99);
  ParameterSet c = init_params(tiny_dims(), 100);
  REQUIRE(a.store.size() == b.store.size());
  bool identical = true, differs = false;
  for (size_t i = 0; i < a.store.size(); ++i) {
    identical &= (a.store.flat()[i] == b.store.flat()[i]);
    differs |= (a.store.flat()[i] != c.store.flat()[i]);
  }
  CHECK(identical);
  CHECK(differs);
  for (const FnnLayer& l : a.message_net.layers)
    for (double v : a.store.values(l.b)) CHECK(v == 0.0);
  for (double v : a.store.values(a.update_cell.bz)) CHECK(v == 0.0);
}

TEST_CASE("weight init is symmetric around zero") {
  // Mean of 10^4 uniform draws on [-r, r]; 3 sigma of the mean is
  // 3 * (r/sqrt(3)) / 100.
  ParamStore store;
  const int fan_in = 100, fan_out = 100;
  const int entry = store.add("w", fan_in, fan_out);
  RngStream rng(5, "init");
  init_weight_uniform(store, entry, fan_in, fan_out, rng);
  const double r = std::sqrt(6.0 / (fan_in + fan_out));
  double sum = 0.0;
  for (double v : store.values(entry)) {
    REQUIRE(v >= -r);
    REQUIRE(v <= r);
    sum += v;
  }
  const double mean = sum / (fan_in * fan_out);
  CHECK(std::abs(mean) < 3.0 * (r / std::sqrt(3.0)) / 100.0);
}

TEST_CASE("zero dimensions are rejected") {
  OperatorDims d = tiny_dims();
  d.message = 0;
  CHECK_THROWS_AS(init_params(d, 1), std::invalid_argument);
}

TEST_CASE("an all-zero relu network outputs zero") {
  ParameterSet p = init_params(tiny_dims(), 1);
  ParamStore zero_store = p.store;
  for (double& v : zero_store.flat()) v = 0.0;
  ParameterSet zeroed = p;
  zeroed.store = zero_store;
  Tensor z(p.message_net.in_dim(), 1);
  for (int i = 0; i < z.rows; ++i) z.data[i] = 0.5 * i;
  Tensor out = fnn_eval(zeroed, zeroed.message_net, z);
  for (double v : out.data) CHECK(v == 0.0);
}

TEST_CASE("the scaled sigmoid head maps zero to half power") {
  ParameterSet p = init_params(tiny_dims(), 1);
  for (double& v : p.store.flat()) v = 0.0;
  Tensor z(p.decision_net.in_dim(), 1);
  Tensor out = fnn_eval(p, p.decision_net, z);
  REQUIRE(out.rows == 1);
  CHECK(out.data[0] == 5.0);
}

TEST_CASE("a 1x1 linear layer is an affine map") {
  ParamStore store;
  FeedForwardNet net =
      make_fnn(store, "lin", std::vector<int>{1, 1}, Activation::kRelu, Activation::kLinear);
  store.values(net.layers[0].w)[0] = 2.0;
  store.values(net.layers[0].b)[0] = 1.0;
  Graph g(&store);
  Var y = fnn_apply(g, net, g.constant(Tensor::vec({3.0})));
  CHECK(g.scalar(y) == 7.0);
}

TEST_CASE("input length mismatches are rejected") {
  ParameterSet p = init_params(tiny_dims(), 2);
  Graph g(&p.store);
  Tensor bad(p.message_net.in_dim() + 1, 1);
  CHECK_THROWS_AS(fnn_apply(g, p.message_net, g.constant(bad)), ad::ShapeError);
}

TEST_CASE("a zero-weight GRU halves its state") {
  ParamStore store;
  GruCell cell = make_gru(store, "cell", 2, 3);
  Graph g(&store);
  Tensor h = Tensor::vec({0.4, -1.2, 2.0});
  Tensor x = Tensor::vec({0.7, 0.1});
  Var out = gru_apply(g, cell, g.constant(h), g.constant(x));
  Tensor v = g.value(out);
  for (int i = 0; i < 3; ++i) CHECK(v.data[i] == doctest::Approx(h.data[i] / 2.0).epsilon(1e-12));
}

TEST_CASE("a closed update gate keeps the state") {
  ParamStore store;
  GruCell cell = make_gru(store, "cell", 2, 3);
  for (double& v : store.values(cell.bz)) v = -50.0;  // update gate ~ 0
  Graph g(&store);
  Tensor h = Tensor::vec({0.4, -1.2, 2.0});
  Tensor x = Tensor::vec({0.7, 0.1});
  Tensor v = g.value(gru_apply(g, cell, g.constant(h), g.constant(x)));
  for (int i = 0; i < 3; ++i) CHECK(v.data[i] == doctest::Approx(h.data[i]).epsilon(1e-9));
}

TEST_CASE("a scalar GRU matches the hand evaluation") {
  // Independent scalar oracle of the gating equations.
  const double h = 0.3, x = 0.8;
  auto sigmoid = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
  const double z = sigmoid(0.5 * h + (-0.3) * x + 0.1);
  const double r = sigmoid(0.2 * h + 0.4 * x + (-0.2));
  const double hc = std::tanh(0.7 * (r * h) + (-0.5) * x + 0.05);
  const double expected = (1 - z) * h + z * hc;
  CHECK(expected == doctest::Approx(0.03301561594271506).epsilon(1e-12));

  ParamStore store;
  GruCell cell = make_gru(store, "cell", 1, 1);
  store.values(cell.wz)[0] = 0.5;
  store.values(cell.wz)[1] = -0.3;
  store.values(cell.bz)[0] = 0.1;
  store.values(cell.wr)[0] = 0.2;
  store.values(cell.wr)[1] = 0.4;
  store.values(cell.br)[0] = -0.2;
  store.values(cell.wh)[0] = 0.7;
  store.values(cell.wh)[1] = -0.5;
  store.values(cell.bh)[0] = 0.05;
  Graph g(&store);
  Var out = gru_apply(g, cell, g.constant(Tensor::vec({h})), g.constant(Tensor::vec({x})));
  CHECK(g.scalar(out) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("GRU output is bounded by max(|h|, 1) coordinate-wise") {
  RngStream rng(21, "prop");
  for (int trial = 0; trial < 50; ++trial) {
    ParamStore store;
    GruCell cell = make_gru(store, "cell", 3, 4);
    for (double& v : store.flat()) v = 2.0 * rng.gaussian();
    Graph g(&store);
    Tensor h(4, 1), x(3, 1);
    for (double& v : h.data) v = 3.0 * rng.gaussian();
    for (double& v : x.data) v = 3.0 * rng.gaussian();
    Tensor out = g.value(gru_apply(g, cell, g.constant(h), g.constant(x)));
    for (int i = 0; i < 4; ++i)
      CHECK(std::abs(out.data[i]) <= std::max(std::abs(h.data[i]), 1.0) + 1e-12);
  }
}

TEST_CASE("decision outputs stay strictly inside (0, P)") {
  RngStream rng(22, "prop");
  ParameterSet p = init_params(tiny_dims(), 77);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor s(p.decision_net.in_dim(), 1);
    for (double& v : s.data) v = 5.0 * rng.gaussian();
    Tensor out = fnn_eval(p, p.decision_net, s);
    for (double v : out.data) {
      CHECK(v > 0.0);
      CHECK(v < p.dims.power_max);
    }
  }
}

TEST_CASE("adam takes a learning-rate-sized first ascent step") {
  ParamStore store;
  store.add("w", 4, 1);
  AdamState adam(store.size(), 0.01);
  std::vector<double> grad(store.size(), 1.0);
  adam_ascend(adam, store, grad);
  // First step: mhat = 1, vhat = 1, so the increment is lr/(1+eps).
  for (double v : store.flat()) CHECK(v == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("adam leaves parameters alone for zero gradients") {
  ParamStore store;
  store.add("w", 4, 1);
  RngStream rng(1, "init");
  for (double& v : store.flat()) v = rng.gaussian();
  std::vector<double> before(store.flat().begin(), store.flat().end());
  AdamState adam(store.size(), 0.01);
  std::vector<double> grad(store.size(), 0.0);
  for (int i = 0; i < 5; ++i) adam_ascend(adam, store, grad);
  for (size_t i = 0; i < before.size(); ++i) CHECK(store.flat()[i] == before[i]);
}

TEST_CASE("adam is deterministic") {
  auto run = [] {
    ParamStore store;
    store.add("w", 8, 1);
    AdamState adam(store.size(), 0.005);
    RngStream rng(2, "grads");
    for (int step = 0; step < 10; ++step) {
      std::vector<double> grad(store.size());
      for (double& gi : grad) gi = rng.gaussian();
      adam_ascend(adam, store, grad);
    }
    return std::vector<double>(store.flat().begin(), store.flat().end());
  };
  CHECK(run() == run());
}

TEST_CASE("fnn and gru gradients pass a tight finite-difference check") {
  ParameterSet p = init_params(tiny_dims(), 31);
  RngStream data(31, "data");

  Graph g(&p.store);
  Tensor z(p.message_net.in_dim(), 1);
  for (double& v : z.data) v = data.gaussian();
  Var y = g.sum_entries(fnn_apply(g, p.message_net, g.constant(z)));
  RngStream coords(31, "coords");
  CHECK(ad::grad_check(g, y, p.store, 1e-6, 100, coords).max_rel_error <= 1e-6);

  Graph g2(&p.store);
  Tensor h(p.dims.state, 1), u(p.update_cell.input, 1);
  for (double& v : h.data) v = data.gaussian();
  for (double& v : u.data) v = data.gaussian();
  Var y2 = g2.sum_entries(gru_apply(g2, p.update_cell, g2.constant(h), g2.constant(u)));
  CHECK(ad::grad_check(g2, y2, p.store, 1e-6, 100, coords).max_rel_error <= 1e-6);
}

TEST_CASE("checkpoints round-trip parameters and dimensions") {
  ParameterSet p = init_params(tiny_dims(), 55);
  const std::string path =
      (std::filesystem::temp_directory_path() / "dmpnn_ckpt_test.txt").string();
  save_checkpoint(path, p);
  ParameterSet q = load_checkpoint(path);
  CHECK(q.dims == p.dims);
  REQUIRE(q.store.size() == p.store.size());
  for (size_t i = 0; i < p.store.size(); ++i) CHECK(q.store.flat()[i] == p.store.flat()[i]);
  std::filesystem::remove(path);
}

TEST_CASE("loading a missing or corrupt checkpoint fails cleanly") {
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.txt"), std::runtime_error);
  const std::string path =
      (std::filesystem::temp_directory_path() / "dmpnn_bad_ckpt.txt").string();
  {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("NOTDMPNN\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
  std::filesystem::remove(path);
}
