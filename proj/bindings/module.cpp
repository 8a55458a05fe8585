#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dmpnn/baselines.hpp"
#include "dmpnn/config.hpp"
#include "dmpnn/engine.hpp"
#include "dmpnn/experiment.hpp"
#include "dmpnn/nets.hpp"
#include "dmpnn/trainer.hpp"

namespace py = pybind11;
using namespace dmpnn;

namespace {

std::vector<std::vector<double>> tensor_list(const std::vector<Tensor>& ts) {
  std::vector<std::vector<double>> out;
  out.reserve(ts.size());
  for (const Tensor& t : ts) out.push_back(t.data);
  return out;
}

std::vector<Tensor> to_tensors(const std::vector<std::vector<double>>& vs) {
  std::vector<Tensor> out;
  out.reserve(vs.size());
  for (const auto& v : vs) {
    Tensor t(static_cast<int>(v.size()), 1);
    t.data = v;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(dmpnn_ext, m) {
  m.doc() = "Distributed message-passing power control over multiplex networks";

  py::class_<OperatorDims>(m, "OperatorDims")
      .def(py::init<>())
      .def_readwrite("state", &OperatorDims::state)
      .def_readwrite("message", &OperatorDims::message)
      .def_readwrite("combined", &OperatorDims::combined)
      .def_readwrite("decision", &OperatorDims::decision)
      .def_readwrite("local_obs", &OperatorDims::local_obs)
      .def_readwrite("cross_obs", &OperatorDims::cross_obs)
      .def_readwrite("hidden", &OperatorDims::hidden)
      .def_readwrite("layers", &OperatorDims::layers)
      .def_readwrite("power_max", &OperatorDims::power_max);

  py::class_<ParameterSet>(m, "ParameterSet")
      .def_property_readonly("dims", [](const ParameterSet& p) { return p.dims; })
      .def_property_readonly("size", [](const ParameterSet& p) { return p.store.size(); });

  m.def("init_params", &init_params, py::arg("dims"), py::arg("seed"));
  m.def("save_checkpoint", &save_checkpoint, py::arg("path"), py::arg("params"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  py::class_<MultiplexNetwork>(m, "MultiplexNetwork")
      .def(py::init<int, EdgeList, EdgeList>(), py::arg("n"), py::arg("physical"),
           py::arg("social"))
      .def_property_readonly("n", &MultiplexNetwork::size)
      .def("physical_edges", &MultiplexNetwork::physical_edges)
      .def("social_edges", &MultiplexNetwork::social_edges)
      .def("neighbors", &MultiplexNetwork::neighbors, py::arg("i"));

  m.def("complete_edges", &complete_edges, py::arg("n"));
  m.def(
      "erdos_renyi_edges",
      [](int n, double p, uint64_t seed, const std::string& stream, uint64_t index) {
        RngStream rng(seed, stream, index);
        return erdos_renyi_edges(n, p, rng);
      },
      py::arg("n"), py::arg("p"), py::arg("seed"), py::arg("stream") = "graphs",
      py::arg("index") = 0);
  m.def("read_graph_file", &read_graph_file, py::arg("path"));
  m.def("write_graph_file", &write_graph_file, py::arg("path"), py::arg("net"));

  py::class_<ChannelRealization>(m, "ChannelRealization")
      .def_readonly("n", &ChannelRealization::n)
      .def_readonly("direct", &ChannelRealization::direct)
      .def("gain", [](const ChannelRealization& c, int j, int i) { return c.gain(j, i); },
           py::arg("j"), py::arg("i"));

  m.def(
      "sample_channels",
      [](int n, uint64_t seed, const std::string& stream, uint64_t index) {
        RngStream rng(seed, stream, index);
        return sample_channels(n, rng);
      },
      py::arg("n"), py::arg("seed"), py::arg("stream") = "channels", py::arg("index") = 0);

  m.def(
      "rate",
      [](int i, const ChannelRealization& c, const std::vector<double>& x,
         const MultiplexNetwork& net) { return rate(i, c, x, net); },
      py::arg("i"), py::arg("chan"), py::arg("power"), py::arg("net"));
  m.def(
      "sum_rate",
      [](const ChannelRealization& c, const std::vector<double>& x, const MultiplexNetwork& net) {
        return sum_rate(c, x, net);
      },
      py::arg("chan"), py::arg("power"), py::arg("net"));
  m.def(
      "min_rate",
      [](const ChannelRealization& c, const std::vector<double>& x, const MultiplexNetwork& net) {
        return min_rate(c, x, net);
      },
      py::arg("chan"), py::arg("power"), py::arg("net"));

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("powers", &Trajectory::powers)
      .def_property_readonly("final_states",
                             [](const Trajectory& t) { return tensor_list(t.final_states); });

  m.def(
      "run_inference",
      [](const MultiplexNetwork& net, const ChannelRealization& chan, const ParameterSet& params,
         int iterations, uint64_t seed, uint64_t index) {
        RngStream rng(seed, "states", index);
        DmpConfig cfg{iterations, StateInit::kGaussian};
        return run_inference(net, chan, params, cfg, rng);
      },
      py::arg("net"), py::arg("chan"), py::arg("params"), py::arg("iterations"), py::arg("seed"),
      py::arg("index") = 0);
  m.def(
      "run_inference_with_states",
      [](const MultiplexNetwork& net, const ChannelRealization& chan, const ParameterSet& params,
         int iterations, const std::vector<std::vector<double>>& states) {
        return run_inference_with_states(net, chan, params, iterations, to_tensors(states));
      },
      py::arg("net"), py::arg("chan"), py::arg("params"), py::arg("iterations"),
      py::arg("states"));

  py::class_<WmmseResult>(m, "WmmseResult")
      .def_readonly("power", &WmmseResult::power)
      .def_readonly("sum_rate_trace", &WmmseResult::sum_rate_trace)
      .def_readonly("iterations", &WmmseResult::iterations);
  m.def(
      "wmmse",
      [](const ChannelRealization& chan, const MultiplexNetwork& net, double power_max,
         int max_iterations, double tolerance) {
        return wmmse(chan, net, power_max, WmmseConfig{max_iterations, tolerance});
      },
      py::arg("chan"), py::arg("net"), py::arg("power_max"), py::arg("max_iterations") = 500,
      py::arg("tolerance") = 1e-6);
  m.def("peak_power", &peak_power, py::arg("n"), py::arg("power_max"));
  m.def(
      "random_power",
      [](int n, double power_max, uint64_t seed, uint64_t index) {
        RngStream rng(seed, "random-power", index);
        return random_power(n, power_max, rng);
      },
      py::arg("n"), py::arg("power_max"), py::arg("seed"), py::arg("index") = 0);

  py::class_<GridOracleResult>(m, "GridOracleResult")
      .def_readonly("power", &GridOracleResult::power)
      .def_readonly("value", &GridOracleResult::value);
  m.def(
      "grid_oracle",
      [](const ChannelRealization& chan, const MultiplexNetwork& net, double power_max,
         const std::string& objective, int grid_points) {
        return grid_oracle(chan, net, power_max,
                           objective == "min-rate" ? Objective::kMinRate : Objective::kSumRate,
                           grid_points);
      },
      py::arg("chan"), py::arg("net"), py::arg("power_max"), py::arg("objective"),
      py::arg("grid_points"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("dims", &TrainConfig::dims)
      .def_readwrite("iterations", &TrainConfig::iterations)
      .def_readwrite("n_min", &TrainConfig::n_min)
      .def_readwrite("n_max", &TrainConfig::n_max)
      .def_readwrite("n_population", &TrainConfig::n_population)
      .def_readwrite("p_train", &TrainConfig::p_train)
      .def_readwrite("p_physical", &TrainConfig::p_physical)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batches_per_epoch", &TrainConfig::batches_per_epoch)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("val_samples", &TrainConfig::val_samples)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("threads", &TrainConfig::threads)
      .def_property(
          "objective",
          [](const TrainConfig& c) {
            return c.objective == Objective::kSumRate ? "sum-rate" : "min-rate";
          },
          [](TrainConfig& c, const std::string& s) {
            c.objective = (s == "min-rate") ? Objective::kMinRate : Objective::kSumRate;
          });

  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("train_objective", &TrainReport::train_objective)
      .def_readonly("val_utility", &TrainReport::val_utility)
      .def_readonly("seconds", &TrainReport::seconds);

  m.def(
      "train",
      [](const TrainConfig& cfg) {
        TrainOutput out = train(cfg);
        return std::make_pair(std::move(out.params), std::move(out.report));
      },
      py::arg("config"), py::call_guard<py::gil_scoped_release>());

  m.def("preset_names", &preset_names);
}
