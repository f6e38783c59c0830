// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "netshrink/graph.hpp"
#include "netshrink/mask.hpp"
#include "netshrink/tensor.hpp"

namespace netshrink {

// Per-node operations. All arithmetic is float32 with a fixed accumulation
// order (input channel, then kernel row, then kernel column), so results are
// bit-reproducible.

/// Cross-correlation with zero padding; bias added after accumulation.
Tensor op_conv2d(const Tensor& x, const Conv2d& conv);
Tensor op_batchnorm(const Tensor& x, const BatchNorm2d& bn);
Tensor op_relu(const Tensor& x);
Tensor op_add(const Tensor& a, const Tensor& b);

/// c[k] = a[i_a[k]] + b[i_b[k]], where a 0 index contributes nothing.
/// Either operand may have zero channels when its indices are all 0.
Tensor op_index_add(const Tensor& a, const Tensor& b, const IndexMap& map);

Tensor op_concat(std::span<const Tensor* const> inputs);
Tensor op_upsample(const Tensor& x, int factor);
Tensor op_global_avg_pool(const Tensor& x);

/// Evaluates `g` on `x` and returns one tensor per entry of `g.outputs`.
/// The input must have `g.input.channels` channels; its spatial size may
/// differ from the declared one. Throws ShapeError naming the failing node.
std::vector<Tensor> run_graph(const Graph& g, const Tensor& x);

/// Reference semantics of a filter-masked network.
///
/// Every pruned filter's channel is forced to exactly zero after the
/// convolution's normalization stage. Channels left without any connection to
/// the input (every contributing filter pruned) are zeroed as well, so
/// constant bias/beta values of disconnected filters do not leak through.
/// Materialized as parameter edits: conv rows and biases and BatchNorm
/// gamma/beta are set to zero. Graph dimensions are unchanged.
Graph apply_hard_mask(const Graph& g, const FilterMask& m);

}  // namespace netshrink
