// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include "netshrink/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "netshrink/errors.hpp"

namespace netshrink {

// ---------------------------------------------------------------------------
// IndexMap

bool IndexMap::is_identity() const {
  const int n = out_channels();
  if (a_channels != n || b_channels != n ||
      static_cast<int>(b_index.size()) != n) {
    return false;
  }
  for (int k = 0; k < n; ++k) {
    if (a_index[k] != k + 1 || b_index[k] != k + 1) return false;
  }
  return true;
}

IndexMap IndexMap::identity(int channels) {
  IndexMap m;
  m.a_channels = channels;
  m.b_channels = channels;
  for (int k = 1; k <= channels; ++k) {
    m.a_index.push_back(k);
    m.b_index.push_back(k);
  }
  return m;
}

std::vector<std::string> check_index_map(const IndexMap& map) {
  std::vector<std::string> out;
  if (map.a_channels < 0 || map.b_channels < 0) {
    out.push_back("negative operand channel count");
  }
  if (map.a_index.size() != map.b_index.size()) {
    out.push_back("a_index and b_index lengths differ (" +
                  std::to_string(map.a_index.size()) + " vs " +
                  std::to_string(map.b_index.size()) + ")");
    return out;
  }
  auto check_side = [&](const std::vector<int>& idx, int n, char side) {
    int last = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const int v = idx[k];
      if (v < 0 || v > n) {
        out.push_back(std::string("index ") + side + "[" + std::to_string(k) +
                      "]=" + std::to_string(v) + " outside {0} U [1;" +
                      std::to_string(n) + "]");
        continue;
      }
      if (v == 0) continue;
      if (v <= last) {
        out.push_back(std::string("nonzero ") + side +
                      " indices not strictly increasing at " +
                      std::to_string(k));
      }
      last = v;
    }
  };
  check_side(map.a_index, map.a_channels, 'a');
  check_side(map.b_index, map.b_channels, 'b');
  for (std::size_t k = 0; k < map.a_index.size(); ++k) {
    if (map.a_index[k] == 0 && map.b_index[k] == 0) {
      out.push_back("output channel " + std::to_string(k + 1) +
                    " has no contribution");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graph helpers

namespace {

struct KindName {
  std::string_view operator()(const Input&) const { return "Input"; }
  std::string_view operator()(const Conv2d&) const { return "Conv2d"; }
  std::string_view operator()(const BatchNorm2d&) const {
    return "BatchNorm2d";
  }
  std::string_view operator()(const Relu&) const { return "ReLU"; }
  std::string_view operator()(const Add&) const { return "Add"; }
  std::string_view operator()(const IndexAdd&) const { return "IndexAdd"; }
  std::string_view operator()(const Concat&) const { return "Concat"; }
  std::string_view operator()(const Upsample&) const { return "Upsample"; }
  std::string_view operator()(const GlobalAvgPool&) const {
    return "GlobalAvgPool";
  }
  std::string_view operator()(const Output&) const { return "Output"; }
};

bool all_finite(const std::vector<float>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](float x) { return std::isfinite(x); });
}

// Result of computing one node's output shape from its input shapes.
struct NodeShape {
  std::optional<Shape> shape;
  std::string rule;
  std::string message;

  static NodeShape fail(std::string rule, std::string message) {
    return {std::nullopt, std::move(rule), std::move(message)};
  }
};

NodeShape node_shape(const Node& node, const std::vector<Shape>& in) {
  const std::string_view kname = kind_name(node.kind);
  auto arity = [&](std::size_t expected) -> std::optional<NodeShape> {
    if (in.size() == expected) return std::nullopt;
    return NodeShape::fail(
        "arity", std::string(kname) + " expects " + std::to_string(expected) +
                     " input(s), got " + std::to_string(in.size()));
  };
  auto same_spatial = [&]() {
    return std::all_of(in.begin(), in.end(), [&](const Shape& s) {
      return s.height == in[0].height && s.width == in[0].width;
    });
  };

  return std::visit(
      [&](const auto& k) -> NodeShape {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Input>) {
          if (auto e = arity(0)) return *e;
          return NodeShape::fail("internal", "Input shape comes from spec");
        } else if constexpr (std::is_same_v<T, Conv2d>) {
          if (auto e = arity(1)) return *e;
          if (in[0].channels != k.in_channels) {
            return NodeShape::fail(
                "channel mismatch",
                "channel mismatch at Conv2d: expects " +
                    std::to_string(k.in_channels) + " input channels, got " +
                    std::to_string(in[0].channels));
          }
          auto h = conv_output_size(in[0].height, k.kernel_h, k.stride,
                                    k.padding);
          auto w =
              conv_output_size(in[0].width, k.kernel_w, k.stride, k.padding);
          if (!h || !w) {
            return NodeShape::fail(
                "spatial", "fractional or empty output size for input " +
                               std::to_string(in[0].height) + "x" +
                               std::to_string(in[0].width));
          }
          return {Shape{k.out_channels, *h, *w}, {}, {}};
        } else if constexpr (std::is_same_v<T, BatchNorm2d>) {
          if (auto e = arity(1)) return *e;
          if (in[0].channels != k.channels()) {
            return NodeShape::fail(
                "channel mismatch",
                "channel mismatch at BatchNorm2d: " +
                    std::to_string(k.channels()) + " vs input " +
                    std::to_string(in[0].channels));
          }
          return {in[0], {}, {}};
        } else if constexpr (std::is_same_v<T, Relu> ||
                             std::is_same_v<T, Output>) {
          if (auto e = arity(1)) return *e;
          return {in[0], {}, {}};
        } else if constexpr (std::is_same_v<T, Add>) {
          if (auto e = arity(2)) return *e;
          if (in[0].channels != in[1].channels) {
            return NodeShape::fail(
                "channel mismatch",
                "channel mismatch at Add: " + std::to_string(in[0].channels) +
                    " vs " + std::to_string(in[1].channels));
          }
          if (!same_spatial()) {
            return NodeShape::fail("spatial", "spatial mismatch at Add");
          }
          return {in[0], {}, {}};
        } else if constexpr (std::is_same_v<T, IndexAdd>) {
          if (auto e = arity(2)) return *e;
          if (in[0].channels != k.index_map.a_channels ||
              in[1].channels != k.index_map.b_channels) {
            return NodeShape::fail(
                "channel mismatch",
                "channel mismatch at IndexAdd: inputs have " +
                    std::to_string(in[0].channels) + " and " +
                    std::to_string(in[1].channels) + ", map expects " +
                    std::to_string(k.index_map.a_channels) + " and " +
                    std::to_string(k.index_map.b_channels));
          }
          if (!same_spatial()) {
            return NodeShape::fail("spatial", "spatial mismatch at IndexAdd");
          }
          return {Shape{k.index_map.out_channels(), in[0].height,
                        in[0].width},
                  {},
                  {}};
        } else if constexpr (std::is_same_v<T, Concat>) {
          if (in.empty()) {
            return NodeShape::fail("arity", "Concat expects at least 1 input");
          }
          if (!same_spatial()) {
            return NodeShape::fail("spatial", "spatial mismatch at Concat");
          }
          Shape s = in[0];
          s.channels = 0;
          for (const auto& x : in) s.channels += x.channels;
          return {s, {}, {}};
        } else if constexpr (std::is_same_v<T, Upsample>) {
          if (auto e = arity(1)) return *e;
          if (k.factor < 1) {
            return NodeShape::fail("params", "Upsample factor must be >= 1");
          }
          return {Shape{in[0].channels, in[0].height * k.factor,
                        in[0].width * k.factor},
                  {},
                  {}};
        } else if constexpr (std::is_same_v<T, GlobalAvgPool>) {
          if (auto e = arity(1)) return *e;
          return {Shape{in[0].channels, 1, 1}, {}, {}};
        }
      },
      node.kind);
}

// Parameter checks that do not depend on inputs.
void check_params(const Node& node, std::vector<Violation>& out) {
  auto add = [&](std::string rule, std::string msg) {
    out.push_back({node.id, std::move(rule), std::move(msg)});
  };
  if (const auto* c = std::get_if<Conv2d>(&node.kind)) {
    if (c->out_channels < 1 || c->in_channels < 1 || c->kernel_h < 1 ||
        c->kernel_w < 1 || c->stride < 1) {
      add("params", "Conv2d dimensions and stride must be >= 1");
      return;
    }
    const auto expected = static_cast<std::size_t>(c->out_channels) *
                          c->in_channels * c->kernel_h * c->kernel_w;
    if (c->weights.size() != expected) {
      add("conv-shape", "weight tensor has " +
                            std::to_string(c->weights.size()) +
                            " entries, expected " + std::to_string(expected));
    }
    if (c->bias && c->bias->size() != static_cast<std::size_t>(c->out_channels)) {
      add("conv-shape", "bias length " + std::to_string(c->bias->size()) +
                            " != out_channels " +
                            std::to_string(c->out_channels));
    }
    if (!all_finite(c->weights) || (c->bias && !all_finite(*c->bias))) {
      add("non-finite", "Conv2d parameters contain NaN or Inf");
    }
  } else if (const auto* bn = std::get_if<BatchNorm2d>(&node.kind)) {
    const auto n = bn->gamma.size();
    if (n == 0 || bn->beta.size() != n || bn->running_mean.size() != n ||
        bn->running_var.size() != n) {
      add("batchnorm-shape", "BatchNorm2d vectors must be non-empty and of "
                             "equal length");
    }
    if (!all_finite(bn->gamma) || !all_finite(bn->beta) ||
        !all_finite(bn->running_mean) || !all_finite(bn->running_var) ||
        !std::isfinite(bn->eps)) {
      add("non-finite", "BatchNorm2d parameters contain NaN or Inf");
    }
    if (std::any_of(bn->running_var.begin(), bn->running_var.end(),
                    [](float v) { return v < 0.0f; })) {
      add("params", "running_var must be >= 0");
    }
    if (!(bn->eps > 0.0f)) add("params", "eps must be > 0");
  } else if (const auto* ia = std::get_if<IndexAdd>(&node.kind)) {
    for (auto& msg : check_index_map(ia->index_map)) add("index-map", msg);
    if (ia->index_map.out_channels() < 1) {
      add("index-map", "IndexAdd must produce at least one channel");
    }
  }
}

}  // namespace

std::string_view kind_name(const NodeKind& kind) {
  return std::visit(KindName{}, kind);
}

std::optional<std::size_t> Graph::find(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return i;
  }
  return std::nullopt;
}

const Node& Graph::node(std::string_view id) const {
  auto i = find(id);
  if (!i) throw GraphError("unknown node id '" + std::string(id) + "'");
  return nodes[*i];
}

std::vector<std::string> Graph::conv_ids() const {
  std::vector<std::string> ids;
  for (const auto& n : nodes) {
    if (n.is<Conv2d>()) ids.push_back(n.id);
  }
  return ids;
}

std::vector<std::vector<std::size_t>> Graph::consumers() const {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < nodes.size(); ++i) pos.emplace(nodes[i].id, i);
  std::vector<std::vector<std::size_t>> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (const auto& in : nodes[i].inputs) {
      if (auto it = pos.find(in); it != pos.end()) out[it->second].push_back(i);
    }
  }
  return out;
}

std::optional<int> conv_output_size(int in, int kernel, int stride,
                                    Padding padding) {
  if (in < 1 || kernel < 1 || stride < 1) return std::nullopt;
  if (padding == Padding::kSame) return (in + stride - 1) / stride;
  if (in < kernel || (in - kernel) % stride != 0) return std::nullopt;
  return (in - kernel) / stride + 1;
}

std::vector<Violation> validate_graph(const Graph& g) {
  std::vector<Violation> out;
  const auto n = g.nodes.size();

  if (g.input.channels < 1 || g.input.height < 1 || g.input.width < 1) {
    out.push_back({"", "input-spec", "input channels/height/width must be >= 1"});
  }

  std::unordered_map<std::string, std::size_t> declared;
  std::unordered_map<std::string, std::size_t> all_ids;
  for (std::size_t i = 0; i < n; ++i) all_ids.emplace(g.nodes[i].id, i);

  std::vector<std::optional<Shape>> shapes(n);
  std::size_t input_nodes = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const Node& node = g.nodes[i];
    if (node.id.empty()) out.push_back({"#" + std::to_string(i), "id", "empty node id"});
    if (declared.count(node.id)) {
      out.push_back({node.id, "duplicate-id", "node id declared twice"});
    }
    check_params(node, out);

    bool inputs_ok = true;
    std::vector<Shape> in_shapes;
    for (const auto& in : node.inputs) {
      auto it = declared.find(in);
      if (it == declared.end()) {
        inputs_ok = false;
        if (all_ids.count(in)) {
          out.push_back({node.id, "cycle/order",
                         "input '" + in + "' is not declared before this node"});
        } else {
          out.push_back({node.id, "unknown-input", "input '" + in + "' does not exist"});
        }
        continue;
      }
      if (!shapes[it->second]) {
        inputs_ok = false;
      } else {
        in_shapes.push_back(*shapes[it->second]);
      }
    }
    if (!declared.count(node.id)) declared.emplace(node.id, i);

    if (node.is<Input>()) {
      ++input_nodes;
      if (!node.inputs.empty()) {
        out.push_back({node.id, "arity", "Input takes no inputs"});
      }
      shapes[i] = Shape{g.input.channels, g.input.height, g.input.width};
      continue;
    }
    if (!inputs_ok) continue;
    NodeShape r = node_shape(node, in_shapes);
    if (!r.shape) {
      out.push_back({node.id, r.rule, r.message});
    } else {
      shapes[i] = r.shape;
    }
  }

  if (input_nodes != 1) {
    out.push_back({"", "input-node", "graph must contain exactly one Input node, found " +
                                         std::to_string(input_nodes)});
  }

  // Outputs list vs Output nodes.
  if (g.outputs.empty()) out.push_back({"", "outputs", "graph declares no outputs"});
  std::unordered_map<std::string, int> listed;
  for (const auto& id : g.outputs) {
    ++listed[id];
    auto it = all_ids.find(id);
    if (it == all_ids.end()) {
      out.push_back({id, "outputs", "listed output does not exist"});
    } else if (!g.nodes[it->second].is<Output>()) {
      out.push_back({id, "outputs", "listed output is not an Output node"});
    }
  }
  for (const auto& node : g.nodes) {
    if (!node.is<Output>()) continue;
    const int c = listed.count(node.id) ? listed[node.id] : 0;
    if (c != 1) {
      out.push_back({node.id, "outputs", "Output node must be listed exactly once in outputs"});
    }
  }

  // Reachability: forward from Input, backward from Outputs.
  const auto cons = g.consumers();
  std::vector<char> from_input(n, 0), to_output(n, 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i) {
    if (g.nodes[i].is<Input>()) {
      from_input[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    auto i = stack.back();
    stack.pop_back();
    for (auto c : cons[i]) {
      if (!from_input[c]) {
        from_input[c] = 1;
        stack.push_back(c);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (g.nodes[i].is<Output>()) {
      to_output[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    auto i = stack.back();
    stack.pop_back();
    for (const auto& in : g.nodes[i].inputs) {
      auto it = all_ids.find(in);
      if (it != all_ids.end() && !to_output[it->second]) {
        to_output[it->second] = 1;
        stack.push_back(it->second);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!from_input[i]) {
      out.push_back({g.nodes[i].id, "unreachable", "node is not reachable from the Input"});
    }
    if (!to_output[i]) {
      out.push_back({g.nodes[i].id, "unused", "node does not reach any Output"});
    }
  }
  return out;
}

void require_valid(const Graph& g) {
  auto violations = validate_graph(g);
  if (violations.empty()) return;
  std::ostringstream os;
  os << "invalid graph (" << violations.size() << " violation"
     << (violations.size() == 1 ? "" : "s") << ")";
  for (const auto& v : violations) {
    os << "\n  [" << v.rule << "] " << (v.node.empty() ? "<graph>" : v.node)
       << ": " << v.message;
  }
  throw GraphError(os.str());
}

std::vector<std::string> topo_order(const Graph& g) {
  const auto n = g.nodes.size();
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < n; ++i) {
    if (!pos.emplace(g.nodes[i].id, i).second) {
      throw GraphError("duplicate node id '" + g.nodes[i].id + "'");
    }
  }
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> cons(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& in : g.nodes[i].inputs) {
      auto it = pos.find(in);
      if (it == pos.end()) {
        throw GraphError("node '" + g.nodes[i].id + "' references unknown input '" +
                         in + "'");
      }
      ++pending[i];
      cons[it->second].push_back(i);
    }
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push(i);
  }
  std::vector<std::string> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto i = ready.top();
    ready.pop();
    order.push_back(g.nodes[i].id);
    for (auto c : cons[i]) {
      if (--pending[c] == 0) ready.push(c);
    }
  }
  if (order.size() != n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (pending[i] != 0) {
        throw GraphError("cycle detected involving node '" + g.nodes[i].id + "'");
      }
    }
  }
  return order;
}

std::vector<Shape> infer_shapes(const Graph& g, int height, int width) {
  std::unordered_map<std::string, std::size_t> pos;
  std::vector<std::optional<Shape>> shapes(g.nodes.size());
  for (const auto& id : topo_order(g)) {
    const auto i = *g.find(id);
    pos.emplace(id, i);
    const Node& node = g.nodes[i];
    if (node.is<Input>()) {
      if (height < 1 || width < 1) {
        throw ShapeError("node '" + id + "': input spatial size must be positive");
      }
      shapes[i] = Shape{g.input.channels, height, width};
      continue;
    }
    std::vector<Shape> in;
    for (const auto& src : node.inputs) in.push_back(*shapes[pos.at(src)]);
    NodeShape r = node_shape(node, in);
    if (!r.shape) throw ShapeError("node '" + id + "': " + r.message);
    shapes[i] = r.shape;
  }
  std::vector<Shape> out;
  out.reserve(shapes.size());
  for (auto& s : shapes) out.push_back(*s);
  return out;
}

std::int64_t count_params(const Graph& g) {
  std::int64_t total = 0;
  for (const auto& node : g.nodes) {
    if (const auto* c = std::get_if<Conv2d>(&node.kind)) {
      total += static_cast<std::int64_t>(c->out_channels) * c->in_channels *
               c->kernel_h * c->kernel_w;
      if (c->bias) total += c->out_channels;
    } else if (const auto* bn = std::get_if<BatchNorm2d>(&node.kind)) {
      total += 4 * static_cast<std::int64_t>(bn->channels());
    }
  }
  return total;
}

std::int64_t count_macs(const Graph& g, int height, int width) {
  const auto shapes = infer_shapes(g, height, width);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (const auto* c = std::get_if<Conv2d>(&g.nodes[i].kind)) {
      total += static_cast<std::int64_t>(c->out_channels) * c->in_channels *
               c->kernel_h * c->kernel_w * shapes[i].height * shapes[i].width;
    }
  }
  return total;
}

}  // namespace netshrink
