#include "dmpnn/nets.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dmpnn {

FeedForwardNet make_fnn(ParamStore& store, const std::string& prefix, std::span<const int> dims,
                        Activation hidden_act, Activation out_act, double output_scale) {
  if (dims.size() < 2) throw std::invalid_argument("make_fnn: need at least in and out dims");
  for (int d : dims)
    if (d <= 0) throw std::invalid_argument("make_fnn: dimensions must be positive");
  FeedForwardNet net;
  net.output_scale = output_scale;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    FnnLayer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    layer.act = (l + 2 == dims.size()) ? out_act : hidden_act;
    layer.w = store.add(prefix + ".w" + std::to_string(l), layer.out, layer.in);
    layer.b = store.add(prefix + ".b" + std::to_string(l), layer.out, 1);
    net.layers.push_back(layer);
  }
  return net;
}

GruCell make_gru(ParamStore& store, const std::string& prefix, int input, int hidden) {
  if (input <= 0 || hidden <= 0) throw std::invalid_argument("make_gru: dimensions must be positive");
  GruCell cell;
  cell.input = input;
  cell.hidden = hidden;
  const int cat = hidden + input;
  cell.wz = store.add(prefix + ".wz", hidden, cat);
  cell.bz = store.add(prefix + ".bz", hidden, 1);
  cell.wr = store.add(prefix + ".wr", hidden, cat);
  cell.br = store.add(prefix + ".br", hidden, 1);
  cell.wh = store.add(prefix + ".wh", hidden, cat);
  cell.bh = store.add(prefix + ".bh", hidden, 1);
  return cell;
}

void init_weight_uniform(ParamStore& store, int entry, int fan_in, int fan_out, RngStream& rng) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& w : store.values(entry)) w = rng.uniform(-bound, bound);
}

static std::vector<int> fnn_dims(int in, int hidden, int layers, int out) {
  std::vector<int> dims;
  dims.push_back(in);
  for (int l = 0; l < layers - 1; ++l) dims.push_back(hidden);
  dims.push_back(out);
  return dims;
}

static ParameterSet build_params(const OperatorDims& dims) {
  if (dims.state <= 0 || dims.message <= 0 || dims.combined <= 0 || dims.decision <= 0 ||
      dims.local_obs <= 0 || dims.cross_obs <= 0 || dims.hidden <= 0 || dims.layers < 1)
    throw std::invalid_argument("init_params: dimensions must be positive");
  ParameterSet p;
  p.dims = dims;
  auto md = fnn_dims(dims.state + dims.cross_obs, dims.hidden, dims.layers, dims.message);
  p.message_net = make_fnn(p.store, "message", md, Activation::kRelu, Activation::kRelu);
  auto cd = fnn_dims(dims.message + dims.cross_obs, dims.hidden, dims.layers, dims.combined);
  p.combine_net = make_fnn(p.store, "combine", cd, Activation::kRelu, Activation::kRelu);
  p.update_cell = make_gru(p.store, "update", dims.combined + dims.local_obs, dims.state);
  auto dd = fnn_dims(dims.state, dims.hidden, dims.layers, dims.decision);
  p.decision_net =
      make_fnn(p.store, "decision", dd, Activation::kRelu, Activation::kScaledSigmoid, dims.power_max);
  return p;
}

ParameterSet init_params(const OperatorDims& dims, uint64_t seed) {
  ParameterSet p = build_params(dims);
  RngStream rng(seed, "init");
  auto init_fnn = [&](const FeedForwardNet& net) {
    for (const FnnLayer& l : net.layers) init_weight_uniform(p.store, l.w, l.in, l.out, rng);
  };
  init_fnn(p.message_net);
  init_fnn(p.combine_net);
  const GruCell& c = p.update_cell;
  const int cat = c.hidden + c.input;
  init_weight_uniform(p.store, c.wz, cat, c.hidden, rng);
  init_weight_uniform(p.store, c.wr, cat, c.hidden, rng);
  init_weight_uniform(p.store, c.wh, cat, c.hidden, rng);
  init_fnn(p.decision_net);
  return p;
}

ad::Var fnn_apply(ad::Graph& g, const FeedForwardNet& net, ad::Var z) {
  ad::Var h = z;
  for (const FnnLayer& layer : net.layers) {
    ad::Var pre = g.add(g.matvec(g.param(layer.w), h), g.param(layer.b));
    switch (layer.act) {
      case Activation::kRelu:
        h = g.relu(pre);
        break;
      case Activation::kScaledSigmoid:
        h = g.scale_shift(g.sigmoid(pre), net.output_scale);
        break;
      case Activation::kLinear:
        h = pre;
        break;
    }
  }
  return h;
}

ad::Var gru_apply(ad::Graph& g, const GruCell& cell, ad::Var hidden, ad::Var input) {
  if (g.rows(hidden) != cell.hidden || g.rows(input) != cell.input)
    throw ad::ShapeError("gru_apply: state or input length does not match the cell");
  const ad::Var hx_parts[] = {hidden, input};
  ad::Var hx = g.concat(hx_parts);
  ad::Var z = g.sigmoid(g.add(g.matvec(g.param(cell.wz), hx), g.param(cell.bz)));
  ad::Var r = g.sigmoid(g.add(g.matvec(g.param(cell.wr), hx), g.param(cell.br)));
  const ad::Var rhx_parts[] = {g.hadamard(r, hidden), input};
  ad::Var rhx = g.concat(rhx_parts);
  ad::Var cand = g.tanh(g.add(g.matvec(g.param(cell.wh), rhx), g.param(cell.bh)));
  ad::Var keep = g.hadamard(g.scale_shift(z, -1.0, 1.0), hidden);
  return g.add(keep, g.hadamard(z, cand));
}

void adam_ascend(AdamState& state, ParamStore& params, std::span<const double> grad) {
  if (grad.size() != params.size() || state.m.size() != params.size())
    throw std::invalid_argument("adam_ascend: size mismatch");
  state.step += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  auto flat = params.flat();
  for (size_t i = 0; i < flat.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    flat[i] += state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

// --- checkpoint IO ----------------------------------------------------------

static constexpr const char* kMagic = "DMPNN1";

void save_checkpoint(const std::string& path, const ParameterSet& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << kMagic << "\n";
  char buf[32];
  for (int e = 0; e < params.store.entry_count(); ++e) {
    const auto& entry = params.store.entry(e);
    out << "tensor " << entry.name << " " << entry.rows << " " << entry.cols << "\n";
    auto v = params.store.values(e);
    for (int r = 0; r < entry.rows; ++r) {
      for (int c = 0; c < entry.cols; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", v[static_cast<size_t>(r) * entry.cols + c]);
        out << buf << (c + 1 == entry.cols ? "" : " ");
      }
      out << "\n";
    }
  }
  const OperatorDims& d = params.dims;
  out << "tensor _meta 9 1\n";
  out << d.state << "\n" << d.message << "\n" << d.combined << "\n" << d.decision << "\n"
      << d.local_obs << "\n" << d.cross_obs << "\n" << d.hidden << "\n" << d.layers << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", d.power_max);
  out << buf << "\n";
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

ParameterSet load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != kMagic) throw std::runtime_error("load_checkpoint: bad header in " + path);

  struct Raw {
    std::string name;
    int rows, cols;
    std::vector<double> data;
  };
  std::vector<Raw> tensors;
  std::string tok;
  while (in >> tok) {
    if (tok != "tensor") throw std::runtime_error("load_checkpoint: expected 'tensor', got " + tok);
    Raw t;
    if (!(in >> t.name >> t.rows >> t.cols) || t.rows <= 0 || t.cols <= 0)
      throw std::runtime_error("load_checkpoint: bad tensor header in " + path);
    t.data.resize(static_cast<size_t>(t.rows) * t.cols);
    for (double& x : t.data)
      if (!(in >> x)) throw std::runtime_error("load_checkpoint: truncated tensor " + t.name);
    tensors.push_back(std::move(t));
  }

  const Raw* meta = nullptr;
  for (const Raw& t : tensors)
    if (t.name == "_meta") meta = &t;
  if (!meta || meta->data.size() != 9)
    throw std::runtime_error("load_checkpoint: missing or malformed _meta in " + path);
  OperatorDims dims;
  dims.state = static_cast<int>(meta->data[0]);
  dims.message = static_cast<int>(meta->data[1]);
  dims.combined = static_cast<int>(meta->data[2]);
  dims.decision = static_cast<int>(meta->data[3]);
  dims.local_obs = static_cast<int>(meta->data[4]);
  dims.cross_obs = static_cast<int>(meta->data[5]);
  dims.hidden = static_cast<int>(meta->data[6]);
  dims.layers = static_cast<int>(meta->data[7]);
  dims.power_max = meta->data[8];

  ParameterSet p = build_params(dims);
  for (const Raw& t : tensors) {
    if (t.name == "_meta") continue;
    const int id = p.store.find(t.name);
    if (id < 0) throw std::runtime_error("load_checkpoint: unknown tensor " + t.name);
    const auto& entry = p.store.entry(id);
    if (entry.rows != t.rows || entry.cols != t.cols)
      throw std::runtime_error("load_checkpoint: shape mismatch for " + t.name);
    auto dst = p.store.values(id);
    std::copy(t.data.begin(), t.data.end(), dst.begin());
  }
  return p;
}

}  // namespace dmpnn
