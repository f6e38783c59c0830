// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "netshrink/graph.hpp"
#include "netshrink/mask.hpp"

namespace netshrink::fixtures {

/// Residual block RB1:
/// Input(2) -> conv1(2->3) -> relu1 -> conv2(3->3) -> relu2 -> conv3(3->3)
/// -> add(conv3, conv1) -> conv4(3->2) -> output, 3x3 kernels on 5x5.
Graph rb1(std::uint64_t seed = 1);

/// Prunes conv1 filter 3 and conv3 filter 2.
FilterMask rb1_mask(const Graph& rb1_graph);

struct MiniResNetOptions {
  std::vector<int> widths{8, 16, 32};
  int blocks_per_stage = 1;
  int input_channels = 3;
  int input_size = 16;
  int classes = 10;
};

/// Stem, one stage per width (stride 2 and a projection skip from the second
/// stage on), global pooling and a 1x1 classifier. BatchNorm gammas are drawn
/// from |N(0, 1)|.
Graph mini_resnet(std::uint64_t seed, const MiniResNetOptions& options = {});

struct RandomGraphOptions {
  int min_blocks = 1;
  int max_blocks = 4;
  int min_channels = 2;
  int max_channels = 8;
  int spatial = 4;
  /// Also emit Concat, Upsample, GlobalAvgPool and second-head patterns.
  bool extras = false;
};

/// Random residual network: stem, residual blocks with identity or projection
/// skips, and a 1x1 head feeding the Output.
Graph random_residual_graph(std::mt19937_64& rng, const RandomGraphOptions& options = {});

struct RandomMaskOptions {
  double prune_probability = 0.4;
  double full_prune_probability = 0.1;
  double keep_all_probability = 0.15;
};

/// Random filter mask; whole convolutions are pruned with
/// `full_prune_probability`.
FilterMask random_mask(const Graph& g, std::mt19937_64& rng, const RandomMaskOptions& options = {});

}  // namespace netshrink::fixtures
