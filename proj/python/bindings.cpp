// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "netshrink/fixtures.hpp"
#include "netshrink/interpreter.hpp"
#include "netshrink/maskgen.hpp"
#include "netshrink/report.hpp"
#include "netshrink/serialize.hpp"
#include "netshrink/shrinker.hpp"

namespace py = pybind11;
using namespace netshrink;

namespace {

using Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  if (a.ndim() != 3) throw ShapeError("input must have shape (channels, height, width)");
  Tensor t(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
           static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), t.data.begin());
  return t;
}

Array to_array(const Tensor& t) {
  Array a({t.channels, t.height, t.width});
  std::copy(t.data.begin(), t.data.end(), a.mutable_data());
  return a;
}

py::dict report_dict(const ShrinkReport& r) {
  py::dict d;
  d["filters_total"] = r.filters_total;
  d["filters_pruned"] = r.filters_pruned;
  d["params_before"] = r.params_before;
  d["params_after"] = r.params_after;
  d["macs_before"] = r.macs_before;
  d["macs_after"] = r.macs_after;
  d["filter_compression"] = r.filter_compression;
  d["param_compression"] = r.param_compression;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<CollapseError>(m, "CollapseError", error);

  m.def("example", [](const std::string& name, std::uint64_t seed) {
    if (name == "rb1") return serialize_graph(fixtures::rb1(seed));
    if (name == "mini-resnet") return serialize_graph(fixtures::mini_resnet(seed));
    throw Error("unknown example: " + name);
  }, py::arg("name"), py::arg("seed") = 1);
  m.def("rb1_mask", [](const std::string& graph) {
    return serialize_mask(fixtures::rb1_mask(deserialize_graph(graph)));
  });
  m.def("canonicalize", [](const std::string& graph) {
    return serialize_graph(deserialize_graph(graph));
  });
  m.def("count_params", [](const std::string& graph) {
    return count_params(deserialize_graph(graph));
  });
  m.def("count_macs", [](const std::string& graph, int height, int width) {
    return count_macs(deserialize_graph(graph), height, width);
  });
  m.def("run", [](const std::string& graph, const Array& x) {
    py::list out;
    for (const auto& t : run_graph(deserialize_graph(graph), to_tensor(x))) out.append(to_array(t));
    return out;
  });
  m.def("prune", [](const std::string& graph, double rate, const std::string& scope) {
    const auto g = deserialize_graph(graph);
    const auto scores = score_bn_gamma(g);
    if (scope == "global") return serialize_mask(select_global(g, scores, rate));
    if (scope == "local") return serialize_mask(select_local(g, scores, rate));
    throw Error("unknown scope: " + scope);
  }, py::arg("graph"), py::arg("rate"), py::arg("scope") = "global");
  m.def("apply_hard_mask", [](const std::string& graph, const std::string& mask) {
    return serialize_graph(apply_hard_mask(deserialize_graph(graph), deserialize_mask(mask)));
  });
  m.def("shrink", [](const std::string& graph, const std::string& mask) {
    const auto r = shrink_pipeline(deserialize_graph(graph), deserialize_mask(mask));
    return py::make_tuple(serialize_graph(r.graph), report_dict(r.report));
  });
}
