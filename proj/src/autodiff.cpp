#include "dmpnn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace dmpnn::ad {

namespace {

// y = W x with four independent accumulator chains; each output element is
// still summed in strictly ascending k order.
void matvec_kernel(const double* w, const double* x, double* y, int rows, int cols) {
  int r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double* w0 = w + static_cast<size_t>(r) * cols;
    const double* w1 = w0 + cols;
    const double* w2 = w1 + cols;
    const double* w3 = w2 + cols;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (int k = 0; k < cols; ++k) {
      const double xk = x[k];
      s0 += w0[k] * xk;
      s1 += w1[k] * xk;
      s2 += w2[k] * xk;
      s3 += w3[k] * xk;
    }
    y[r] = s0;
    y[r + 1] = s1;
    y[r + 2] = s2;
    y[r + 3] = s3;
  }
  for (; r < rows; ++r) {
    const double* wr = w + static_cast<size_t>(r) * cols;
    double s = 0.0;
    for (int k = 0; k < cols; ++k) s += wr[k] * x[k];
    y[r] = s;
  }
}

}  // namespace

Graph::Graph(const ParamStore* params) : params_(params) {}

void Graph::reset() {
  nodes_.clear();
  list_args_.clear();
  const_data_.clear();
  named_inputs_.clear();
  param_nodes_.assign(params_ ? params_->entry_count() : 0, -1);
  arena_used_ = 0;
  forward_valid_ = false;
  backward_valid_ = false;
}

void Graph::reset(const ParamStore* params) {
  params_ = params;
  reset();
}

const Graph::Node& Graph::node(Var v) const {
  if (!v.valid() || v.id >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("Graph: invalid node handle");
  return nodes_[v.id];
}

void Graph::shape_fail(const char* op, int id, const std::string& detail) const {
  throw ShapeError(std::string(op) + ": " + detail + " (node " + std::to_string(id) + ")");
}

Var Graph::push(Node n) {
  n.val = arena_used_;
  arena_used_ += static_cast<size_t>(n.rows) * n.cols;
  if (values_.size() < arena_used_) values_.resize(arena_used_);
  nodes_.push_back(n);
  const int id = static_cast<int>(nodes_.size()) - 1;
  eval_node(id);
  // Eager creation doubles as the forward pass; only bind() invalidates it.
  if (!forward_valid_ && id == 0) forward_valid_ = true;
  return Var{id};
}

Var Graph::constant(std::span<const double> v, int rows, int cols) {
  if (static_cast<size_t>(rows) * cols != v.size())
    throw ShapeError("constant: data length does not match shape");
  Node n;
  n.op = Op::kConst;
  n.rows = rows;
  n.cols = cols;
  n.aux = const_data_.size();
  const_data_.insert(const_data_.end(), v.begin(), v.end());
  return push(n);
}

Var Graph::constant(const Tensor& t) {
  return constant(std::span<const double>(t.data.data(), t.data.size()), t.rows, t.cols);
}

Var Graph::scalar_constant(double v) {
  return constant(std::span<const double>(&v, 1), 1, 1);
}

Var Graph::input(const std::string& name, const Tensor& t) {
  for (const auto& [nm, id] : named_inputs_)
    if (nm == name) throw std::invalid_argument("input: duplicate name " + name);
  Node n;
  n.op = Op::kInput;
  n.rows = t.rows;
  n.cols = t.cols;
  n.aux = const_data_.size();
  const_data_.insert(const_data_.end(), t.data.begin(), t.data.end());
  Var v = push(n);
  named_inputs_.emplace_back(name, v.id);
  return v;
}

void Graph::bind(const std::string& name, const Tensor& t) {
  for (const auto& [nm, id] : named_inputs_) {
    if (nm == name) {
      Node& n = nodes_[id];
      if (n.rows != t.rows || n.cols != t.cols)
        shape_fail("bind", id, "shape mismatch for input " + name);
      std::copy(t.data.begin(), t.data.end(), const_data_.begin() + n.aux);
      forward_valid_ = false;
      return;
    }
  }
  throw std::invalid_argument("bind: no input named " + name);
}

Var Graph::param(int entry_id) {
  if (!params_) throw std::invalid_argument("param: graph has no parameter store");
  if (entry_id < 0 || entry_id >= params_->entry_count())
    throw std::invalid_argument("param: entry id out of range");
  if (param_nodes_.size() != static_cast<size_t>(params_->entry_count()))
    param_nodes_.assign(params_->entry_count(), -1);
  if (param_nodes_[entry_id] >= 0) return Var{param_nodes_[entry_id]};
  const auto& e = params_->entry(entry_id);
  Node n;
  n.op = Op::kParam;
  n.rows = e.rows;
  n.cols = e.cols;
  n.store_entry = entry_id;
  Var v = push(n);
  param_nodes_[entry_id] = v.id;
  return v;
}

Var Graph::matvec(Var w, Var x) {
  const Node& nw = node(w);
  const Node& nx = node(x);
  Node n;
  n.op = Op::kMatVec;
  if (nx.cols != 1)
    shape_fail("matvec", nodes_.size(), "x must be a column vector, got " +
                                            std::to_string(nx.rows) + "x" + std::to_string(nx.cols));
  if (nw.cols != nx.rows)
    shape_fail("matvec", nodes_.size(),
               "W is " + std::to_string(nw.rows) + "x" + std::to_string(nw.cols) + " but x has " +
                   std::to_string(nx.rows) + " rows");
  n.rows = nw.rows;
  n.cols = 1;
  n.a = w.id;
  n.b = x.id;
  return push(n);
}

Var Graph::add(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.rows != nb.rows || na.cols != nb.cols)
    shape_fail("add", nodes_.size(),
               std::to_string(na.rows) + "x" + std::to_string(na.cols) + " vs " +
                   std::to_string(nb.rows) + "x" + std::to_string(nb.cols));
  Node n;
  n.op = Op::kAdd;
  n.rows = na.rows;
  n.cols = na.cols;
  n.a = a.id;
  n.b = b.id;
  return push(n);
}

Var Graph::hadamard(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.rows != nb.rows || na.cols != nb.cols)
    shape_fail("hadamard", nodes_.size(),
               std::to_string(na.rows) + "x" + std::to_string(na.cols) + " vs " +
                   std::to_string(nb.rows) + "x" + std::to_string(nb.cols));
  Node n;
  n.op = Op::kHadamard;
  n.rows = na.rows;
  n.cols = na.cols;
  n.a = a.id;
  n.b = b.id;
  return push(n);
}

Var Graph::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: empty part list");
  int total = 0;
  for (Var p : parts) {
    const Node& np = node(p);
    if (np.cols != 1) shape_fail("concat", nodes_.size(), "parts must be column vectors");
    total += np.rows;
  }
  Node n;
  n.op = Op::kConcat;
  n.rows = total;
  n.cols = 1;
  n.list_begin = static_cast<int>(list_args_.size());
  for (Var p : parts) list_args_.push_back(p.id);
  n.list_end = static_cast<int>(list_args_.size());
  return push(n);
}

Var Graph::relu(Var x) {
  const Node& nx = node(x);
  Node n;
  n.op = Op::kRelu;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.a = x.id;
  return push(n);
}

Var Graph::sigmoid(Var x) {
  const Node& nx = node(x);
  Node n;
  n.op = Op::kSigmoid;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.a = x.id;
  return push(n);
}

Var Graph::tanh(Var x) {
  const Node& nx = node(x);
  Node n;
  n.op = Op::kTanh;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.a = x.id;
  return push(n);
}

Var Graph::log(Var x) {
  const Node& nx = node(x);
  Node n;
  n.op = Op::kLog;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.a = x.id;
  return push(n);
}

Var Graph::scale_shift(Var x, double mul, double shift) {
  const Node& nx = node(x);
  Node n;
  n.op = Op::kScaleShift;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.a = x.id;
  n.c1 = mul;
  n.c2 = shift;
  return push(n);
}

Var Graph::clip(Var x, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clip: lo must not exceed hi");
  const Node& nx = node(x);
  Node n;
  n.op = Op::kClip;
  n.rows = nx.rows;
  n.cols = nx.cols;
  n.a = x.id;
  n.c1 = lo;
  n.c2 = hi;
  return push(n);
}

Var Graph::sum(std::span<const Var> terms, int rows, int cols) {
  for (Var t : terms) {
    const Node& nt = node(t);
    if (nt.rows != rows || nt.cols != cols)
      shape_fail("sum", nodes_.size(),
                 "term is " + std::to_string(nt.rows) + "x" + std::to_string(nt.cols) +
                     ", declared " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  Node n;
  n.op = Op::kSum;
  n.rows = rows;
  n.cols = cols;
  n.list_begin = static_cast<int>(list_args_.size());
  for (Var t : terms) list_args_.push_back(t.id);
  n.list_end = static_cast<int>(list_args_.size());
  return push(n);
}

Var Graph::sum_entries(Var x) {
  node(x);  // validates the handle
  Node n;
  n.op = Op::kSumEntries;
  n.rows = 1;
  n.cols = 1;
  n.a = x.id;
  return push(n);
}

Var Graph::min_entries(Var x) {
  const Node& nx = node(x);
  if (nx.rows * nx.cols == 0) throw ShapeError("min_entries: empty tensor");
  Node n;
  n.op = Op::kMinEntries;
  n.rows = 1;
  n.cols = 1;
  n.a = x.id;
  return push(n);
}

void Graph::eval_node(int id) {
  Node& n = nodes_[id];
  double* out = values_.data() + n.val;
  const int size = n.rows * n.cols;
  switch (n.op) {
    case Op::kConst:
    case Op::kInput:
      std::memcpy(out, const_data_.data() + n.aux, sizeof(double) * size);
      break;
    case Op::kParam: {
      auto v = params_->values(n.store_entry);
      std::memcpy(out, v.data(), sizeof(double) * size);
      break;
    }
    case Op::kMatVec: {
      const Node& nw = nodes_[n.a];
      const Node& nx = nodes_[n.b];
      matvec_kernel(values_.data() + nw.val, values_.data() + nx.val, out, nw.rows, nw.cols);
      break;
    }
    case Op::kAdd: {
      const double* a = values_.data() + nodes_[n.a].val;
      const double* b = values_.data() + nodes_[n.b].val;
      for (int i = 0; i < size; ++i) out[i] = a[i] + b[i];
      break;
    }
    case Op::kHadamard: {
      const double* a = values_.data() + nodes_[n.a].val;
      const double* b = values_.data() + nodes_[n.b].val;
      for (int i = 0; i < size; ++i) out[i] = a[i] * b[i];
      break;
    }
    case Op::kConcat: {
      double* dst = out;
      for (int k = n.list_begin; k < n.list_end; ++k) {
        const Node& np = nodes_[list_args_[k]];
        std::memcpy(dst, values_.data() + np.val, sizeof(double) * np.rows);
        dst += np.rows;
      }
      break;
    }
    case Op::kRelu: {
      const double* a = values_.data() + nodes_[n.a].val;
      for (int i = 0; i < size; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
      break;
    }
    case Op::kSigmoid: {
      const double* a = values_.data() + nodes_[n.a].val;
      for (int i = 0; i < size; ++i) out[i] = 1.0 / (1.0 + std::exp(-a[i]));
      break;
    }
    case Op::kTanh: {
      const double* a = values_.data() + nodes_[n.a].val;
      for (int i = 0; i < size; ++i) out[i] = std::tanh(a[i]);
      break;
    }
    case Op::kLog: {
      const double* a = values_.data() + nodes_[n.a].val;
      for (int i = 0; i < size; ++i) out[i] = std::log(a[i]);
      break;
    }
    case Op::kScaleShift: {
      const double* a = values_.data() + nodes_[n.a].val;
      for (int i = 0; i < size; ++i) out[i] = n.c1 * a[i] + n.c2;
      break;
    }
    case Op::kClip: {
      const double* a = values_.data() + nodes_[n.a].val;
      for (int i = 0; i < size; ++i) out[i] = std::min(std::max(a[i], n.c1), n.c2);
      break;
    }
    case Op::kSum: {
      std::memset(out, 0, sizeof(double) * size);
      for (int k = n.list_begin; k < n.list_end; ++k) {
        const double* a = values_.data() + nodes_[list_args_[k]].val;
        for (int i = 0; i < size; ++i) out[i] += a[i];
      }
      break;
    }
    case Op::kSumEntries: {
      const Node& na = nodes_[n.a];
      const double* a = values_.data() + na.val;
      const int m = na.rows * na.cols;
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += a[i];
      out[0] = s;
      break;
    }
    case Op::kMinEntries: {
      const Node& na = nodes_[n.a];
      const double* a = values_.data() + na.val;
      const int m = na.rows * na.cols;
      int arg = 0;
      double best = a[0];
      for (int i = 1; i < m; ++i) {
        if (a[i] < best) {
          best = a[i];
          arg = i;
        }
      }
      out[0] = best;
      n.aux = static_cast<size_t>(arg);
      break;
    }
  }
}

void Graph::forward() {
  for (int id = 0; id < static_cast<int>(nodes_.size()); ++id) eval_node(id);
  forward_valid_ = true;
  backward_valid_ = false;
}

int Graph::rows(Var v) const { return node(v).rows; }
int Graph::cols(Var v) const { return node(v).cols; }

std::span<const double> Graph::data(Var v) const {
  const Node& n = node(v);
  return std::span<const double>(values_.data() + n.val, static_cast<size_t>(n.rows) * n.cols);
}

double Graph::scalar(Var v) const {
  const Node& n = node(v);
  if (n.rows != 1 || n.cols != 1)
    throw ShapeError("scalar: node is " + std::to_string(n.rows) + "x" + std::to_string(n.cols));
  return values_[n.val];
}

Tensor Graph::value(Var v) const {
  const Node& n = node(v);
  Tensor t(n.rows, n.cols);
  std::memcpy(t.data.data(), values_.data() + n.val, sizeof(double) * t.size());
  return t;
}

void Graph::backward(Var out) {
  Tensor seed(1, 1);
  seed.data[0] = 1.0;
  const Node& n = node(out);
  if (n.rows != 1 || n.cols != 1)
    throw ShapeError("backward: default seed requires a scalar output");
  backward(out, seed);
}

void Graph::backward(Var out, const Tensor& seed) {
  const Node& root = node(out);
  if (!forward_valid_)
    throw std::runtime_error("backward: forward pass required first");
  if (seed.rows != root.rows || seed.cols != root.cols)
    throw ShapeError("backward: seed shape mismatch");
  grads_.assign(values_.size(), 0.0);
  std::memcpy(grads_.data() + root.val, seed.data.data(), sizeof(double) * seed.size());

  for (int id = out.id; id >= 0; --id) {
    const Node& n = nodes_[id];
    const double* g = grads_.data() + n.val;
    const int size = n.rows * n.cols;
    switch (n.op) {
      case Op::kConst:
      case Op::kInput:
      case Op::kParam:
        break;
      case Op::kMatVec: {
        const Node& nw = nodes_[n.a];
        const Node& nx = nodes_[n.b];
        const double* w = values_.data() + nw.val;
        const double* x = values_.data() + nx.val;
        double* gw = grads_.data() + nw.val;
        double* gx = grads_.data() + nx.val;
        for (int r = 0; r < nw.rows; ++r) {
          const double gr = g[r];
          if (gr == 0.0) continue;
          const double* wr = w + static_cast<size_t>(r) * nw.cols;
          double* gwr = gw + static_cast<size_t>(r) * nw.cols;
          for (int k = 0; k < nw.cols; ++k) {
            gx[k] += wr[k] * gr;
            gwr[k] += gr * x[k];
          }
        }
        break;
      }
      case Op::kAdd: {
        double* ga = grads_.data() + nodes_[n.a].val;
        double* gb = grads_.data() + nodes_[n.b].val;
        for (int i = 0; i < size; ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case Op::kHadamard: {
        const double* a = values_.data() + nodes_[n.a].val;
        const double* b = values_.data() + nodes_[n.b].val;
        double* ga = grads_.data() + nodes_[n.a].val;
        double* gb = grads_.data() + nodes_[n.b].val;
        for (int i = 0; i < size; ++i) {
          ga[i] += g[i] * b[i];
          gb[i] += g[i] * a[i];
        }
        break;
      }
      case Op::kConcat: {
        const double* gs = g;
        for (int k = n.list_begin; k < n.list_end; ++k) {
          const Node& np = nodes_[list_args_[k]];
          double* gp = grads_.data() + np.val;
          for (int i = 0; i < np.rows; ++i) gp[i] += gs[i];
          gs += np.rows;
        }
        break;
      }
      case Op::kRelu: {
        const double* a = values_.data() + nodes_[n.a].val;
        double* ga = grads_.data() + nodes_[n.a].val;
        for (int i = 0; i < size; ++i)
          if (a[i] > 0.0) ga[i] += g[i];
        break;
      }
      case Op::kSigmoid: {
        const double* y = values_.data() + n.val;
        double* ga = grads_.data() + nodes_[n.a].val;
        for (int i = 0; i < size; ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
        break;
      }
      case Op::kTanh: {
        const double* y = values_.data() + n.val;
        double* ga = grads_.data() + nodes_[n.a].val;
        for (int i = 0; i < size; ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      }
      case Op::kLog: {
        const double* a = values_.data() + nodes_[n.a].val;
        double* ga = grads_.data() + nodes_[n.a].val;
        for (int i = 0; i < size; ++i) ga[i] += g[i] / a[i];
        break;
      }
      case Op::kScaleShift: {
        double* ga = grads_.data() + nodes_[n.a].val;
        for (int i = 0; i < size; ++i) ga[i] += g[i] * n.c1;
        break;
      }
      case Op::kClip: {
        const double* a = values_.data() + nodes_[n.a].val;
        double* ga = grads_.data() + nodes_[n.a].val;
        for (int i = 0; i < size; ++i)
          if (a[i] > n.c1 && a[i] < n.c2) ga[i] += g[i];
        break;
      }
      case Op::kSum: {
        for (int k = n.list_begin; k < n.list_end; ++k) {
          double* gt = grads_.data() + nodes_[list_args_[k]].val;
          for (int i = 0; i < size; ++i) gt[i] += g[i];
        }
        break;
      }
      case Op::kSumEntries: {
        const Node& na = nodes_[n.a];
        double* ga = grads_.data() + na.val;
        const int m = na.rows * na.cols;
        const double gs = g[0];
        for (int i = 0; i < m; ++i) ga[i] += gs;
        break;
      }
      case Op::kMinEntries: {
        double* ga = grads_.data() + nodes_[n.a].val;
        ga[n.aux] += g[0];
        break;
      }
    }
  }
  backward_valid_ = true;
}

std::span<const double> Graph::grad(Var v) const {
  if (!backward_valid_) throw std::runtime_error("grad: backward pass required first");
  const Node& n = node(v);
  return std::span<const double>(grads_.data() + n.val, static_cast<size_t>(n.rows) * n.cols);
}

Tensor Graph::grad_tensor(Var v) const {
  auto g = grad(v);
  const Node& n = node(v);
  Tensor t(n.rows, n.cols);
  std::copy(g.begin(), g.end(), t.data.begin());
  return t;
}

void Graph::add_param_grads(std::span<double> flat_grads) const {
  if (!backward_valid_) throw std::runtime_error("add_param_grads: backward pass required first");
  if (!params_) return;
  if (flat_grads.size() != params_->size())
    throw std::invalid_argument("add_param_grads: buffer size mismatch");
  for (size_t e = 0; e < param_nodes_.size(); ++e) {
    const int id = param_nodes_[e];
    if (id < 0) continue;
    const Node& n = nodes_[id];
    const auto& entry = params_->entry(n.store_entry);
    const double* g = grads_.data() + n.val;
    double* dst = flat_grads.data() + entry.offset;
    for (int i = 0; i < entry.size(); ++i) dst[i] += g[i];
  }
}

GradCheckReport grad_check(Graph& g, Var out, ParamStore& params, double h, int n_coords,
                           RngStream& rng) {
  if (h <= 0.0) throw std::invalid_argument("grad_check: h must be positive");
  g.forward();
  g.backward(out);
  std::vector<double> analytic(params.size(), 0.0);
  g.add_param_grads(analytic);
  return grad_check_against(g, out, params, analytic, h, n_coords, rng);
}

GradCheckReport grad_check_against(Graph& g, Var out, ParamStore& params,
                                   std::span<const double> analytic, double h, int n_coords,
                                   RngStream& rng) {
  if (params.size() == 0) throw std::invalid_argument("grad_check: no parameters bound");
  GradCheckReport report;
  auto flat = params.flat();
  for (int c = 0; c < n_coords; ++c) {
    const size_t idx = rng.uniform_int(flat.size());
    const double saved = flat[idx];
    flat[idx] = saved + h;
    g.forward();
    const double fp = g.scalar(out);
    flat[idx] = saved - h;
    g.forward();
    const double fm = g.scalar(out);
    flat[idx] = saved;
    const double numeric = (fp - fm) / (2.0 * h);
    const double an = analytic[idx];
    const double rel = std::abs(an - numeric) / std::max(1e-12, std::abs(an) + std::abs(numeric));
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_flat_index = static_cast<int>(idx);
      report.worst_analytic = an;
      report.worst_numeric = numeric;
    }
  }
  g.forward();
  return report;
}

}  // namespace dmpnn::ad
