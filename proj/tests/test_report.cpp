// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "netshrink/errors.hpp"
#include "netshrink/fixtures.hpp"
#include "netshrink/report.hpp"
#include "netshrink/shrinker.hpp"

using namespace netshrink;

namespace {

Conv2d conv(int out, int in, int k, bool bias) {
  Conv2d c;
  c.out_channels = out;
  c.in_channels = in;
  c.kernel_h = c.kernel_w = k;
  c.weights.assign(static_cast<std::size_t>(out) * in * k * k, 0.5f);
  if (bias) c.bias.emplace(out, 0.5f);
  return c;
}

Graph single(int out, int in, int k, bool bias) {
  Graph g;
  g.input = {in, 4, 4};
  g.nodes = {{"x", Input{}, {}}, {"c", conv(out, in, k, bias), {"x"}}, {"y", Output{}, {"c"}}};
  g.outputs = {"y"};
  return g;
}

// Input -> c1 -> ... -> cN -> Output with widths[0] input channels.
Graph chain(const std::vector<int>& widths, int k) {
  Graph g;
  g.input = {widths[0], 5, 5};
  g.nodes = {{"x", Input{}, {}}};
  std::string prev = "x";
  for (std::size_t i = 1; i < widths.size(); ++i) {
    const auto id = "c" + std::to_string(i);
    g.nodes.push_back(Node{id, conv(widths[i], widths[i - 1], k, true), {prev}});
    prev = id;
  }
  g.nodes.push_back(Node{"y", Output{}, {prev}});
  g.outputs = {"y"};
  return g;
}

}  // namespace

TEST_CASE("filter compression of 10 pruned filters out of 100") {
  Graph g = chain({3, 100, 4}, 1);
  auto m = FilterMask::all_kept(g);
  std::vector<bool> keep(100, true);
  for (int f = 0; f < 10; ++f) keep[f * 7] = false;
  m.set("c1", keep);
  auto r = shrink_pipeline(g, m).report;
  CHECK(r.filters_total == 104);
  CHECK(r.filters_pruned == 10);
  CHECK(r.filter_compression == doctest::Approx(104.0 / 94.0));

  // Counting the 100-filter layer alone.
  FilterMask layer;
  layer.set("c1", keep);
  CHECK(static_cast<double>(layer.filter_count()) /
            static_cast<double>(layer.filter_count() - layer.pruned_count()) ==
        doctest::Approx(1.111111));
}

TEST_CASE("parameter compression is the ratio of counts") {
  auto before = single(4, 3, 3, true);
  auto after = single(2, 3, 3, true);
  CHECK(count_params(before) == 112);
  CHECK(count_params(after) == 56);
  auto m = FilterMask::all_kept(before);
  m.set("c", {true, false, true, false});
  auto r = compression_report(before, after, m);
  CHECK(r.param_compression == 2.0);
  CHECK(r.filter_compression == 2.0);
  CHECK(r.param_pruning_rate() == 0.5);
  CHECK(r.macs_before == 4 * 3 * 9 * 16);
  CHECK(r.macs_after == 2 * 3 * 9 * 16);
}

TEST_CASE("nothing pruned gives unit compression") {
  auto g = fixtures::mini_resnet(1);
  auto r = compression_report(g, g, FilterMask::all_kept(g));
  CHECK(r.filter_compression == 1.0);
  CHECK(r.param_compression == 1.0);
  CHECK(r.param_pruning_rate() == 0.0);
}

TEST_CASE("a graph without parameters cannot be reported") {
  auto before = single(2, 2, 1, false);
  Graph empty;
  empty.input = {2, 4, 4};
  empty.nodes = {{"x", Input{}, {}}, {"y", Output{}, {"x"}}};
  empty.outputs = {"y"};
  CHECK_THROWS_AS(compression_report(before, empty, FilterMask::all_kept(before)), Error);
}

TEST_CASE("chain reduction matches the closed form") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 30; ++t) {
    std::vector<int> widths;
    const int depth = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i <= depth; ++i) widths.push_back(2 + static_cast<int>(rng() % 6));
    const int k = 1 + 2 * static_cast<int>(rng() % 2);
    auto g = chain(widths, k);
    // Prune p filters of one interior conv.
    const int layer = 1 + static_cast<int>(rng() % (depth - 1));
    const int p = static_cast<int>(rng() % widths[layer]);
    auto m = FilterMask::all_kept(g);
    std::vector<bool> keep(widths[layer], true);
    for (int f = 0; f < p; ++f) keep[f] = false;
    m.set("c" + std::to_string(layer), keep);
    auto r = shrink_pipeline(g, m).report;
    const std::int64_t own = static_cast<std::int64_t>(p) * (widths[layer - 1] * k * k + 1);
    const std::int64_t downstream = static_cast<std::int64_t>(p) * widths[layer + 1] * k * k;
    CHECK(r.params_before - r.params_after == own + downstream);
    CHECK(r.param_compression >= 1.0);
  }
}

TEST_CASE("report documents are reproducible") {
  auto g = fixtures::rb1();
  auto a = report_document(shrink_pipeline(g, fixtures::rb1_mask(g)).report);
  auto b = report_document(shrink_pipeline(g, fixtures::rb1_mask(g)).report);
  CHECK(a == b);
  CHECK(a.find("\"param_compression\"") != std::string::npos);
}
