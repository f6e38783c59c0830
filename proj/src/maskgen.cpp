// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include "netshrink/maskgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "netshrink/errors.hpp"

namespace netshrink {

namespace {

bool channel_wise(const Node& n) {
  return n.is<BatchNorm2d>() || n.is<Relu>() || n.is<Upsample>() || n.is<GlobalAvgPool>();
}

void check_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error("pruning rate must be in [0, 1), got " + std::to_string(rate));
  }
}

std::unordered_map<std::string, std::size_t> conv_positions(const Graph& g) {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].is<Conv2d>()) pos.emplace(g.nodes[i].id, i);
  }
  return pos;
}

// Marks the `count` lowest-ranked entries of `idx` (indices into scores) as
// pruned in `mask`.
void prune_lowest(const Graph& g, const FilterScores& scores, std::vector<std::size_t> idx,
                  std::size_t count, FilterMask& mask) {
  const auto pos = conv_positions(g);
  auto key = [&](std::size_t i) {
    const auto& e = scores.entries[i];
    return std::make_tuple(e.score, pos.at(e.conv_id), e.filter);
  };
  std::sort(idx.begin(), idx.end(), [&](auto l, auto r) { return key(l) < key(r); });
  for (std::size_t k = 0; k < count && k < idx.size(); ++k) {
    const auto& e = scores.entries[idx[k]];
    auto keep = mask.at(e.conv_id);
    keep[e.filter] = false;
    mask.set(e.conv_id, std::move(keep));
  }
}

void check_scores(const Graph& g, const FilterScores& scores) {
  for (const auto& e : scores.entries) {
    auto i = g.find(e.conv_id);
    if (!i || !g.nodes[*i].is<Conv2d>()) {
      throw MaskError("score refers to unknown convolution '" + e.conv_id + "'");
    }
    if (e.filter < 0 || e.filter >= g.nodes[*i].as<Conv2d>().out_channels) {
      throw MaskError("score filter index out of range for '" + e.conv_id + "'");
    }
    if (!(e.score >= 0.0)) throw MaskError("scores must be non-negative");
  }
}

}  // namespace

std::size_t prune_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
}

std::vector<std::string> prunable_convs(const Graph& g) {
  const auto cons = g.consumers();
  // feeds_output[i]: node i reaches an Output through channel-wise nodes only.
  std::vector<char> feeds_output(g.nodes.size(), 0);
  for (std::size_t i = g.nodes.size(); i-- > 0;) {
    for (auto c : cons[i]) {
      const Node& consumer = g.nodes[c];
      if (consumer.is<Output>() || (channel_wise(consumer) && feeds_output[c])) {
        feeds_output[i] = 1;
      }
    }
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i].is<Conv2d>() && !feeds_output[i]) out.push_back(g.nodes[i].id);
  }
  return out;
}

FilterScores score_bn_gamma(const Graph& g) {
  const auto cons = g.consumers();
  FilterScores scores;
  for (const auto& id : prunable_convs(g)) {
    const auto i = *g.find(id);
    if (cons[i].size() != 1 || !g.nodes[cons[i][0]].is<BatchNorm2d>()) {
      throw GraphError("convolution '" + id +
                       "' is not immediately followed by a BatchNorm2d; the bn-gamma "
                       "criterion cannot score it");
    }
    const auto& bn = g.nodes[cons[i][0]].as<BatchNorm2d>();
    for (int f = 0; f < bn.channels(); ++f) {
      scores.entries.push_back({id, f, std::fabs(static_cast<double>(bn.gamma[f]))});
    }
  }
  return scores;
}

FilterMask select_global(const Graph& g, const FilterScores& scores, double rate) {
  check_rate(rate);
  check_scores(g, scores);
  FilterMask mask = FilterMask::all_kept(g);
  std::vector<std::size_t> idx(scores.entries.size());
  std::iota(idx.begin(), idx.end(), 0);
  prune_lowest(g, scores, idx, prune_count(rate, idx.size()), mask);
  return mask;
}

FilterMask select_local(const Graph& g, const FilterScores& scores, double rate) {
  check_rate(rate);
  check_scores(g, scores);
  FilterMask mask = FilterMask::all_kept(g);
  for (const auto& id : g.conv_ids()) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < scores.entries.size(); ++i) {
      if (scores.entries[i].conv_id == id) idx.push_back(i);
    }
    const auto count = prune_count(rate, idx.size());
    prune_lowest(g, scores, std::move(idx), count, mask);
  }
  return mask;
}

FilterMask select(const Graph& g, const FilterScores& scores, double rate, PruningScope scope) {
  return scope == PruningScope::kGlobal ? select_global(g, scores, rate)
                                        : select_local(g, scores, rate);
}

std::vector<double> iteration_schedule(double target_rate, int iterations) {
  if (iterations < 1) throw Error("iterations must be >= 1");
  check_rate(target_rate);
  std::vector<double> rates;
  for (int t = 1; t <= iterations; ++t) {
    rates.push_back(target_rate * t / iterations);
  }
  return rates;
}

double smooth_l1_penalty(const std::vector<double>& gammas, double lambda, double delta) {
  if (!(delta > 0.0)) throw Error("smooth-L1 delta must be > 0");
  double sum = 0.0;
  for (double g : gammas) {
    const double z = std::fabs(g);
    sum += z < delta ? z * z / (2.0 * delta) : z - delta / 2.0;
  }
  return lambda * sum;
}

}  // namespace netshrink
