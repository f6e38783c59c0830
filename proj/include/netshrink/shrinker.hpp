// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "netshrink/abstraction.hpp"
#include "netshrink/errors.hpp"
#include "netshrink/graph.hpp"
#include "netshrink/mask.hpp"
#include "netshrink/report.hpp"
#include "netshrink/structural_mask.hpp"

namespace netshrink {

/// How one Add/IndexAdd of the source graph is emitted.
struct AdditionRewrite {
  enum class Kind {
    kAdd,       // both operands keep the same channels: plain addition
    kIndexAdd,  // indexation-addition with `map`
    kBypass,    // one operand passes through unchanged
    kRemove,    // no output channel survives
  };
  Kind kind = Kind::kAdd;
  IndexMap map;
  /// Source input position feeding operand a and operand b of the emitted
  /// node. {0, 0} or {1, 1} selects channels from a single operand.
  std::array<int, 2> operands{0, 1};
  /// kBypass: source input position that replaces the addition.
  int bypass_input = 0;

  friend bool operator==(const AdditionRewrite&, const AdditionRewrite&) = default;
};

std::string_view rewrite_kind_name(AdditionRewrite::Kind kind);

struct IndexMapTable {
  std::map<std::string, AdditionRewrite> additions;
  /// Surviving original channel indices (0-based, increasing) of every source
  /// node; empty for deleted nodes. The Input keeps all its channels.
  std::map<std::string, std::vector<int>> channels;
};

/// Reads the index maps off the analyzed identity convolutions. Indices of a
/// map refer to the surviving channels of the operand, in original order.
IndexMapTable extract_index_maps(const AbstractGraph& ag, const ChannelLiveness& liveness);

/// Applies m' to `g`: removes pruned filters and dead kernel slices, biases
/// and BatchNorm channels, deletes dead nodes and rewrites additions per
/// `maps`. Throws GraphError when `m_prime` or `maps` do not fit `g`.
Graph rewrite_graph(const Graph& g, const StructuralMask& m_prime, const IndexMapTable& maps);

struct CollapseReport {
  bool collapsed = false;
  /// "<output id>[channel]" (1-based) for every Output channel that lost its
  /// connection to the input.
  std::vector<std::string> dead_outputs;
  /// Fully removed convolutions upstream of a dead Output.
  std::vector<std::string> cut_nodes;

  std::string describe() const;
};

CollapseReport detect_collapse(const StructuralMask& m_prime, const Graph& g);

class CollapseError : public Error {
 public:
  explicit CollapseError(CollapseReport report)
      : Error("layer collapse: " + report.describe()), report_(std::move(report)) {}
  const CollapseReport& report() const { return report_; }

 private:
  CollapseReport report_;
};

struct ShrinkResult {
  Graph graph;
  ShrinkReport report;
  StructuralMask structural_mask;
  IndexMapTable index_maps;
  AbstractGraph abstraction;
  ChannelLiveness liveness;
};

/// Full pipeline: abstraction, identity convolutions, connectivity passes,
/// m', collapse check, index maps, rewrite and accounting. Throws
/// CollapseError when the mask disconnects an output.
ShrinkResult shrink_pipeline(const Graph& g, const FilterMask& m);

/// Audit document with m', the identity-convolution patterns, the addition
/// rewrites and the surviving channels (all channel indices 1-based).
std::string structural_mask_document(const StructuralMask& m_prime, const IndexMapTable& maps);

}  // namespace netshrink
