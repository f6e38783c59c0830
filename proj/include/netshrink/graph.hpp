// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "netshrink/index_map.hpp"

namespace netshrink {

enum class Padding { kSame, kValid };

struct Input {
  friend bool operator==(const Input&, const Input&) = default;
};

/// 2-D convolution, cross-correlation convention.
/// Weights are laid out [out][in][kernel_h][kernel_w].
struct Conv2d {
  int out_channels = 0;
  int in_channels = 0;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  Padding padding = Padding::kSame;
  std::vector<float> weights;
  std::optional<std::vector<float>> bias;

  std::size_t weight_index(int o, int i, int kh, int kw) const {
    return ((static_cast<std::size_t>(o) * in_channels + i) * kernel_h + kh) *
               kernel_w +
           kw;
  }
  float weight(int o, int i, int kh, int kw) const {
    return weights[weight_index(o, i, kh, kw)];
  }

  friend bool operator==(const Conv2d&, const Conv2d&) = default;
};

/// Inference-mode batch normalization:
/// y = gamma * (x - running_mean) / sqrt(running_var + eps) + beta.
struct BatchNorm2d {
  std::vector<float> gamma;
  std::vector<float> beta;
  std::vector<float> running_mean;
  std::vector<float> running_var;
  float eps = 1e-5f;

  int channels() const { return static_cast<int>(gamma.size()); }

  friend bool operator==(const BatchNorm2d&, const BatchNorm2d&) = default;
};

struct Relu {
  friend bool operator==(const Relu&, const Relu&) = default;
};
struct Add {
  friend bool operator==(const Add&, const Add&) = default;
};
struct IndexAdd {
  IndexMap index_map;
  friend bool operator==(const IndexAdd&, const IndexAdd&) = default;
};
/// Channel-wise concatenation in input order.
struct Concat {
  friend bool operator==(const Concat&, const Concat&) = default;
};
/// Nearest-neighbour upsampling by an integer factor.
struct Upsample {
  int factor = 2;
  friend bool operator==(const Upsample&, const Upsample&) = default;
};
struct GlobalAvgPool {
  friend bool operator==(const GlobalAvgPool&, const GlobalAvgPool&) = default;
};
struct Output {
  friend bool operator==(const Output&, const Output&) = default;
};

using NodeKind = std::variant<Input, Conv2d, BatchNorm2d, Relu, Add, IndexAdd,
                              Concat, Upsample, GlobalAvgPool, Output>;

/// Name used in documents and diagnostics ("Conv2d", "IndexAdd", ...).
std::string_view kind_name(const NodeKind& kind);

struct Node {
  std::string id;
  NodeKind kind;
  std::vector<std::string> inputs;

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(kind);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(kind);
  }
  template <typename T>
  T& as() {
    return std::get<T>(kind);
  }

  friend bool operator==(const Node&, const Node&) = default;
};

struct InputSpec {
  int channels = 0;
  int height = 0;
  int width = 0;
  friend bool operator==(const InputSpec&, const InputSpec&) = default;
};

/// A convolutional network as a DAG of typed nodes in declaration order.
///
/// Valid graphs have exactly one Input node, declare every node after its
/// inputs, and list each Output node once in `outputs`.
struct Graph {
  InputSpec input;
  std::vector<Node> nodes;
  std::vector<std::string> outputs;

  /// Position of `id` in `nodes`, if present.
  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws GraphError when `id` is absent.
  const Node& node(std::string_view id) const;

  /// Ids of the Conv2d nodes in declaration order.
  std::vector<std::string> conv_ids() const;
  /// For each node, the positions of the nodes consuming it (one entry per
  /// edge, so a node used twice by the same consumer appears twice).
  std::vector<std::vector<std::size_t>> consumers() const;

  friend bool operator==(const Graph&, const Graph&) = default;
};

struct Violation {
  std::string node;
  std::string rule;
  std::string message;
};

/// Checks every graph invariant. Never throws; violations are data.
std::vector<Violation> validate_graph(const Graph& g);

/// Throws GraphError listing the violations when `g` is not valid.
void require_valid(const Graph& g);

/// Topological order of node ids, stable by declaration order among ready
/// nodes. Throws GraphError on a cycle or a dangling input reference.
std::vector<std::string> topo_order(const Graph& g);

struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Output spatial size of a convolution along one axis, or nullopt when the
/// configuration yields a non-positive or fractional size.
std::optional<int> conv_output_size(int in, int kernel, int stride,
                                    Padding padding);

/// Output shape of every node (indexed like `g.nodes`) for the given input
/// spatial size. Throws ShapeError naming the node on any inconsistency.
std::vector<Shape> infer_shapes(const Graph& g, int height, int width);

/// Weights + biases of every Conv2d and 4 vectors per BatchNorm2d.
std::int64_t count_params(const Graph& g);

/// Multiply-accumulates of all convolutions at the given input size.
std::int64_t count_macs(const Graph& g, int height, int width);
inline std::int64_t count_macs(const Graph& g) {
  return count_macs(g, g.input.height, g.input.width);
}

}  // namespace netshrink
