// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include <json.hpp>

#include "netshrink/fixtures.hpp"
#include "netshrink/interpreter.hpp"
#include "netshrink/maskgen.hpp"
#include "netshrink/shrinker.hpp"
#include "oracle.hpp"

using namespace netshrink;

namespace {

Conv2d conv(int out, int in, int k, bool bias) {
  Conv2d c;
  c.out_channels = out;
  c.in_channels = in;
  c.kernel_h = c.kernel_w = k;
  c.weights.assign(static_cast<std::size_t>(out) * in * k * k, 0.25f);
  if (bias) c.bias.emplace(out, 0.5f);
  return c;
}

Tensor random_tensor(std::mt19937_64& rng, const InputSpec& s) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  Tensor t(s.channels, s.height, s.width);
  for (auto& v : t.data) v = n(rng);
  return t;
}

// Largest deviation relative to 1 + |reference|_inf over `inputs` draws.
double relative_deviation(const Graph& shrunk, const Graph& reference, int inputs,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < inputs; ++t) {
    auto x = random_tensor(rng, reference.input);
    auto a = run_graph(shrunk, x);
    auto b = run_graph(reference, x);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      REQUIRE(a[k].data.size() == b[k].data.size());
      double dev = 0.0, mag = 0.0;
      for (std::size_t i = 0; i < a[k].data.size(); ++i) {
        dev = std::max(dev, static_cast<double>(std::abs(a[k].data[i] - b[k].data[i])));
        mag = std::max(mag, static_cast<double>(std::abs(b[k].data[i])));
      }
      worst = std::max(worst, dev / (1.0 + mag));
    }
  }
  return worst;
}

const IndexAdd* find_index_add(const Graph& g, const std::string& id) {
  auto i = g.find(id);
  if (!i) return nullptr;
  return std::get_if<IndexAdd>(&g.nodes[*i].kind);
}

}  // namespace

TEST_CASE("extract_index_maps on fully live guards is the identity") {
  auto g = fixtures::rb1();
  auto r = shrink_pipeline(g, FilterMask::all_kept(g));
  const auto& rw = r.index_maps.additions.at("add");
  CHECK(rw.kind == AdditionRewrite::Kind::kAdd);
  CHECK(rw.map == IndexMap::identity(3));
}

TEST_CASE("RB1 shrinks to an IndexAdd with the expected maps") {
  auto g = fixtures::rb1();
  auto r = shrink_pipeline(g, fixtures::rb1_mask(g));
  const auto& rw = r.index_maps.additions.at("add");
  CHECK(rw.kind == AdditionRewrite::Kind::kIndexAdd);
  CHECK(rw.map.a_index == std::vector<int>{1, 0, 2});
  CHECK(rw.map.b_index == std::vector<int>{1, 2, 0});
  CHECK(rw.map.out_channels() == 3);

  const auto* ia = find_index_add(r.graph, "add");
  REQUIRE(ia);
  CHECK(ia->index_map == rw.map);
  CHECK(r.graph.node("conv4").as<Conv2d>().in_channels == 3);
  CHECK(r.graph.node("conv1").as<Conv2d>().out_channels == 2);
  CHECK(r.graph.node("conv2").as<Conv2d>().in_channels == 2);
  CHECK(r.graph.node("conv3").as<Conv2d>().out_channels == 2);
  CHECK(validate_graph(r.graph).empty());

  // Parameters equal the connected count observed by perturbation.
  auto pm = oracle::perturbation_mask(g, fixtures::rb1_mask(g), 5);
  CHECK(count_params(r.graph) == oracle::connected_parameter_count(g, pm));

  CHECK(relative_deviation(r.graph, apply_hard_mask(g, fixtures::rb1_mask(g)), 20, 1) <= 1e-5);
}

TEST_CASE("addition with a fully pruned branch becomes a bypass") {
  auto g = fixtures::rb1();
  auto m = fixtures::rb1_mask(g);
  m.set("conv3", {false, false, false});
  auto r = shrink_pipeline(g, m);
  const auto& rw = r.index_maps.additions.at("add");
  CHECK(rw.kind == AdditionRewrite::Kind::kBypass);
  CHECK(rw.bypass_input == 1);
  CHECK_FALSE(r.graph.find("add"));
  CHECK_FALSE(r.graph.find("conv2"));
  CHECK_FALSE(r.graph.find("conv3"));
  CHECK(r.graph.node("conv4").inputs == std::vector<std::string>{"conv1"});
  CHECK(r.graph.node("conv4").as<Conv2d>().in_channels == 2);
  CHECK(validate_graph(r.graph).empty());
  CHECK(relative_deviation(r.graph, apply_hard_mask(g, m), 20, 2) <= 1e-5);
}

TEST_CASE("rewrite_graph with an all-kept mask is the identity") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    auto g = fixtures::random_residual_graph(rng, {.extras = true});
    auto r = shrink_pipeline(g, FilterMask::all_kept(g));
    CHECK(r.graph == g);
    CHECK(r.report.param_compression == 1.0);
    CHECK(r.report.filter_compression == 1.0);
  }
}

TEST_CASE("chain dimensions after pruning two filters") {
  Graph g;
  g.input = {3, 4, 4};
  g.nodes = {{"x", Input{}, {}}, {"c1", conv(4, 3, 3, true), {"x"}}, {"c2", conv(4, 4, 3, true), {"c1"}},
             {"y", Output{}, {"c2"}}};
  g.outputs = {"y"};
  auto m = FilterMask::all_kept(g);
  m.set("c1", {true, false, true, false});
  auto r = shrink_pipeline(g, m);
  const auto& c1 = r.graph.node("c1").as<Conv2d>();
  const auto& c2 = r.graph.node("c2").as<Conv2d>();
  CHECK(c1.in_channels == 3);
  CHECK(c1.out_channels == 2);
  CHECK(c2.in_channels == 2);
  CHECK(c2.out_channels == 4);
  CHECK(count_params(Graph{g.input, {r.graph.nodes[0], r.graph.nodes[1]}, {}}) == 56);
  CHECK(r.report.params_before - r.report.params_after == 2 * (3 * 9 + 1) + 4 * 2 * 9);
  CHECK(r.report.params_after == 56 + 76);
}

TEST_CASE("rewrite_graph rejects a structural mask that does not fit") {
  auto g = fixtures::rb1();
  auto r = shrink_pipeline(g, fixtures::rb1_mask(g));
  auto sm = r.structural_mask;
  sm.convs[0].second.slice_keep = BoolMatrix(2, 2, true);
  CHECK_THROWS_AS(rewrite_graph(g, sm, r.index_maps), GraphError);
  auto maps = r.index_maps;
  maps.additions.clear();
  CHECK_THROWS_AS(rewrite_graph(g, r.structural_mask, maps), GraphError);
}

TEST_CASE("detect_collapse") {
  Graph g;
  g.input = {2, 3, 3};
  g.nodes = {{"x", Input{}, {}}, {"c", conv(2, 2, 1, true), {"x"}}, {"y", Output{}, {"c"}}};
  g.outputs = {"y"};
  FilterMask m;
  m.set("c", {false, false});
  for (int t = 0; t < 3; ++t) {
    try {
      shrink_pipeline(g, m);
      FAIL("expected a collapse");
    } catch (const CollapseError& e) {
      CHECK(e.report().collapsed);
      CHECK(e.report().dead_outputs == std::vector<std::string>{"y[1]", "y[2]"});
      CHECK(e.report().cut_nodes == std::vector<std::string>{"c"});
    }
  }

  auto rb1 = fixtures::rb1();
  auto rm = fixtures::rb1_mask(rb1);
  rm.set("conv3", {false, false, false});
  auto ag = build_abstraction(rb1, rm);
  auto live = connectivity_backward(ag, connectivity_forward(ag));
  CHECK_FALSE(detect_collapse(derive_structural_mask(ag, live), rb1).collapsed);

  auto full = build_abstraction(rb1, FilterMask::all_kept(rb1));
  auto full_live = connectivity_backward(full, connectivity_forward(full));
  CHECK_FALSE(detect_collapse(derive_structural_mask(full, full_live), rb1).collapsed);

  // Pruning one head filter disconnects one output channel.
  auto part = fixtures::rb1();
  auto pm = FilterMask::all_kept(part);
  pm.set("conv4", {true, false});
  auto pr = build_abstraction(part, pm);
  auto plive = connectivity_backward(pr, connectivity_forward(pr));
  auto report = detect_collapse(derive_structural_mask(pr, plive), part);
  CHECK(report.collapsed);
  CHECK(report.dead_outputs == std::vector<std::string>{"output[2]"});
}

TEST_CASE("shrink_pipeline on a mini-ResNet at global rate 0.5") {
  auto g = fixtures::mini_resnet(17);
  auto m = select_global(g, score_bn_gamma(g), 0.5);
  auto r = shrink_pipeline(g, m);
  CHECK(validate_graph(r.graph).empty());
  CHECK(r.report.params_after < r.report.params_before);
  CHECK(r.report.filter_compression == doctest::Approx(static_cast<double>(m.filter_count()) /
                                                       (m.filter_count() - m.pruned_count())));
  CHECK(relative_deviation(r.graph, apply_hard_mask(g, m), 10, 3) <= 1e-5);
}

TEST_CASE("structural mask document") {
  auto g = fixtures::rb1();
  auto r = shrink_pipeline(g, fixtures::rb1_mask(g));
  auto doc = nlohmann::json::parse(structural_mask_document(r.structural_mask, r.index_maps));
  CHECK(doc["additions"]["add"]["rewrite"] == "index_add");
  CHECK(doc["additions"]["add"]["a_index"] == nlohmann::json::array({1, 0, 2}));
  CHECK(doc["additions"]["add"]["b_index"] == nlohmann::json::array({1, 2, 0}));
  CHECK(doc["convs"]["conv1"]["filter_keep"] == nlohmann::json::array({1, 1, 0}));
  CHECK(doc["channels"]["conv3"] == nlohmann::json::array({1, 3}));
  CHECK(doc["identity_convs"]["add/guard_a"][1] == nlohmann::json::array({0, 0, 0}));
}

TEST_CASE("addition whose operands keep disjoint channels") {
  Graph g;
  g.input = {2, 3, 3};
  g.nodes = {{"x", Input{}, {}},
             {"c1", conv(3, 2, 1, true), {"x"}},
             {"r", Relu{}, {"c1"}},
             {"c2", conv(2, 3, 1, true), {"r"}},
             {"c3", conv(2, 3, 1, true), {"c1"}},
             {"add", Add{}, {"c2", "c3"}},
             {"y", Output{}, {"add"}}};
  g.outputs = {"y"};
  auto m = FilterMask::all_kept(g);
  m.set("c2", {true, false});
  m.set("c3", {false, true});
  auto r = shrink_pipeline(g, m);
  CHECK(validate_graph(r.graph).empty());
  const auto* ia = find_index_add(r.graph, "add");
  REQUIRE(ia);
  CHECK(ia->index_map == IndexMap{{1, 0}, {0, 1}, 1, 1});
  CHECK(relative_deviation(r.graph, apply_hard_mask(g, m), 10, 4) <= 1e-5);
  CHECK(oracle::dead_parameters(oracle::positive_instantiation(r.graph, 1)).empty());
}
