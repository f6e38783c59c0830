// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

// Architectural abstraction of a masked network and its connectivity passes.
//
// The abstraction drops biases, activations and normalization, replaces each
// convolution's weights by its filter mask and guards every addition input
// with an identity convolution. Fed with a uniform positive input, such a
// network is linear with non-negative weights, so a weight has a non-null
// gradient exactly when its input channel carries signal and its output
// channel reaches an output. The passes below evaluate that predicate over
// the boolean semiring on channel vectors, which is exact and cannot
// overflow.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netshrink/graph.hpp"
#include "netshrink/mask.hpp"
#include "netshrink/structural_mask.hpp"

namespace netshrink {

enum class AbstractKind {
  kInput,
  kConv,
  kIdentityConv,
  /// BatchNorm2d, ReLU, Upsample and GlobalAvgPool: channel identity.
  kPassThrough,
  kAdd,
  kIndexAdd,
  kConcat,
  kOutput,
};

std::string_view abstract_kind_name(AbstractKind kind);

struct AbstractNode {
  /// Source node id; identity convolutions use "<addition id>/guard_a|b".
  std::string id;
  /// Source node the abstract node stands for (the addition, for guards).
  std::string source;
  AbstractKind kind = AbstractKind::kPassThrough;
  std::vector<std::size_t> inputs;
  int channels = 0;
  /// kConv: C (out x in), C[o][i] = mask[o]. kIdentityConv: n x n keep pattern.
  BoolMatrix connectivity;
  /// kIndexAdd only.
  IndexMap index_map;
};

/// Nodes in topological order; inputs refer to earlier positions.
struct AbstractGraph {
  std::vector<AbstractNode> nodes;

  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t identity_conv_count() const;
};

/// Per abstract node, per output channel.
struct ChannelLiveness {
  /// Reachable from the input through unmasked weights.
  std::vector<std::vector<bool>> forward;
  /// Reaches an Output through unmasked weights.
  std::vector<std::vector<bool>> backward;
};

/// Builds the abstraction of `g` under `m`, identity convolutions included.
/// Throws GraphError for invalid graphs and MaskError for mismatched masks.
AbstractGraph build_abstraction(const Graph& g, const FilterMask& m);

/// Guards every Add/IndexAdd input not already guarded with a fresh identity
/// convolution of matching size. Idempotent.
AbstractGraph insert_identity_convs(AbstractGraph ag);

/// Forward pass with an all-ones input: which channels carry signal.
ChannelLiveness connectivity_forward(const AbstractGraph& ag);

/// Reverse pass from the Output channels. Returns `forward` with the backward
/// part filled in.
ChannelLiveness connectivity_backward(const AbstractGraph& ag, ChannelLiveness forward);

/// Weight cell (o, i) of a convolution is kept iff input channel i is forward
/// live, output channel o is backward live and C[o][i] holds.
StructuralMask derive_structural_mask(const AbstractGraph& ag, const ChannelLiveness& liveness);

/// Text table of both liveness vectors per abstract node, for debugging.
std::string liveness_table(const AbstractGraph& ag, const ChannelLiveness& liveness);

}  // namespace netshrink
