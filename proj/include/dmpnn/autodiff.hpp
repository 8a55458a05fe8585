#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmpnn/params.hpp"
#include "dmpnn/rng.hpp"
#include "dmpnn/tensor.hpp"

namespace dmpnn::ad {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Handle to a node in a Graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape over dense tensors. Nodes evaluate eagerly when created;
// forward() re-evaluates the whole tape (after a bind() or a parameter-store
// change) and backward() walks the tape once in reverse creation order.
// Every reduction runs in ascending index order, so repeated evaluations are
// bit-identical.
class Graph {
 public:
  explicit Graph(const ParamStore* params = nullptr);

  // Drops all nodes but keeps allocated capacity; optionally rebinds the
  // parameter store.
  void reset();
  void reset(const ParamStore* params);

  // --- leaves -------------------------------------------------------------
  Var constant(std::span<const double> v, int rows, int cols = 1);
  Var constant(const Tensor& t);
  Var scalar_constant(double v);
  // Named rebindable leaf; bind() replaces its value and invalidates the
  // forward pass until forward() is called again.
  Var input(const std::string& name, const Tensor& t);
  void bind(const std::string& name, const Tensor& t);
  // Leaf over a parameter-store entry. Memoized: one node per entry.
  Var param(int entry_id);

  // --- primitives ----------------------------------------------------------
  Var matvec(Var w, Var x);
  Var add(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var concat(std::span<const Var> parts);
  Var relu(Var x);
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var log(Var x);
  // y = mul * x + shift, elementwise with scalar constants.
  Var scale_shift(Var x, double mul, double shift = 0.0);
  // Gradient passes only strictly inside (lo, hi).
  Var clip(Var x, double lo, double hi);
  // Elementwise sum of equally shaped tensors, added in list order; the
  // empty sum is the zero tensor of the declared shape.
  Var sum(std::span<const Var> terms, int rows, int cols = 1);
  Var sum_entries(Var x);
  // Min over entries; the subgradient routes to the argmin entry, ties to
  // the lowest index.
  Var min_entries(Var x);

  // --- evaluation ----------------------------------------------------------
  void forward();
  bool forward_valid() const { return forward_valid_; }
  int rows(Var v) const;
  int cols(Var v) const;
  std::span<const double> data(Var v) const;
  double scalar(Var v) const;
  Tensor value(Var v) const;

  void backward(Var out);                     // scalar output, seed 1
  void backward(Var out, const Tensor& seed); // seed shaped like the output
  std::span<const double> grad(Var v) const;
  Tensor grad_tensor(Var v) const;
  // Adds d(out)/d(param) into a buffer laid out like ParamStore::flat().
  void add_param_grads(std::span<double> flat_grads) const;

  int node_count() const { return static_cast<int>(nodes_.size()); }
  const ParamStore* params() const { return params_; }

 private:
  enum class Op : uint8_t {
    kConst, kInput, kParam,
    kMatVec, kAdd, kHadamard, kConcat,
    kRelu, kSigmoid, kTanh, kLog,
    kScaleShift, kClip,
    kSum, kSumEntries, kMinEntries,
  };

  struct Node {
    Op op;
    int rows, cols;
    int a = -1, b = -1;
    int list_begin = 0, list_end = 0;
    double c1 = 0.0, c2 = 0.0;
    size_t val = 0;        // offset into values_/grads_
    int store_entry = -1;  // kParam
    size_t aux = 0;        // kConst/kInput: offset into const_data_; kMinEntries: argmin
  };

  Var push(Node n);
  void eval_node(int id);
  const Node& node(Var v) const;
  [[noreturn]] void shape_fail(const char* op, int id, const std::string& detail) const;

  const ParamStore* params_ = nullptr;
  std::vector<Node> nodes_;
  std::vector<int> list_args_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<double> const_data_;
  std::vector<int> param_nodes_;  // entry id -> node id memo
  std::vector<std::pair<std::string, int>> named_inputs_;
  size_t arena_used_ = 0;
  bool forward_valid_ = false;
  bool backward_valid_ = false;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  int worst_flat_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Central-difference check of d(out)/d(params) on n_coords parameter
// coordinates sampled uniformly with the given stream. Relative error per
// coordinate is |analytic - numeric| / max(1e-12, |analytic| + |numeric|).
// The store is restored before returning.
GradCheckReport grad_check(Graph& g, Var out, ParamStore& params, double h, int n_coords,
                           RngStream& rng);

// Same probe but against externally supplied analytic gradients (lets tests
// inject corrupted gradients and confirm the checker trips).
GradCheckReport grad_check_against(Graph& g, Var out, ParamStore& params,
                                   std::span<const double> analytic, double h, int n_coords,
                                   RngStream& rng);

}  // namespace dmpnn::ad
