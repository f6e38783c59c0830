// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "netshrink/graph.hpp"
#include "netshrink/mask.hpp"

namespace netshrink {

struct FilterScore {
  std::string conv_id;
  int filter = 0;
  double score = 0.0;
};

/// Eligible filters with their importance, in (conv declaration, filter) order.
struct FilterScores {
  std::vector<FilterScore> entries;
};

enum class PruningScope { kGlobal, kLocal };

struct PruningConfig {
  double target_rate = 0.0;
  PruningScope scope = PruningScope::kGlobal;
  int iterations = 1;
  double lambda = 0.0;
  double delta = 1.0;
};

/// Convolutions that may be pruned: every Conv2d except those reaching an
/// Output through channel-wise nodes only (the task head).
std::vector<std::string> prunable_convs(const Graph& g);

/// |gamma| of the BatchNorm2d that is the sole consumer of each prunable
/// convolution. Throws GraphError when a prunable convolution is not followed
/// by a BatchNorm2d.
FilterScores score_bn_gamma(const Graph& g);

/// Prunes the floor(rate * N) lowest scores across all layers. Ties prune the
/// earlier layer, then the lower filter index, first. Filters without a score
/// are kept.
FilterMask select_global(const Graph& g, const FilterScores& scores, double rate);

/// Same selection applied per layer with floor(rate * scored filters).
FilterMask select_local(const Graph& g, const FilterScores& scores, double rate);

FilterMask select(const Graph& g, const FilterScores& scores, double rate,
                  PruningScope scope);

/// rate_t = target * t / iterations for t = 1..iterations.
std::vector<double> iteration_schedule(double target_rate, int iterations);

/// lambda * sum f(|gamma|) with f(z) = z^2 / (2 delta) for z < delta and
/// z - delta / 2 otherwise.
double smooth_l1_penalty(const std::vector<double>& gammas, double lambda,
                         double delta = 1.0);

/// floor(rate * n) with a small tolerance for binary rounding of rate * n.
std::size_t prune_count(double rate, std::size_t n);

}  // namespace netshrink
