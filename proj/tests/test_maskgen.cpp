// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "netshrink/errors.hpp"
#include "netshrink/fixtures.hpp"
#include "netshrink/maskgen.hpp"

using namespace netshrink;

namespace {

Conv2d conv(int out, int in) {
  Conv2d c;
  c.out_channels = out;
  c.in_channels = in;
  c.weights.assign(static_cast<std::size_t>(out) * in, 1.0f);
  return c;
}

BatchNorm2d bn(std::vector<float> gamma) {
  const auto n = gamma.size();
  return BatchNorm2d{std::move(gamma), std::vector<float>(n, 0.0f), std::vector<float>(n, 0.0f),
                     std::vector<float>(n, 1.0f)};
}

// Input -> L1 -> bn1 -> L2 -> bn2 -> relu -> head -> Output.
Graph two_layer(std::vector<float> g1, std::vector<float> g2) {
  const int n1 = static_cast<int>(g1.size());
  const int n2 = static_cast<int>(g2.size());
  Graph g;
  g.input = {2, 3, 3};
  g.nodes = {{"x", Input{}, {}},
             {"L1", conv(n1, 2), {"x"}},
             {"bn1", bn(std::move(g1)), {"L1"}},
             {"L2", conv(n2, n1), {"bn1"}},
             {"bn2", bn(std::move(g2)), {"L2"}},
             {"relu", Relu{}, {"bn2"}},
             {"head", conv(2, n2), {"relu"}},
             {"y", Output{}, {"head"}}};
  g.outputs = {"y"};
  return g;
}

std::vector<bool> bits(std::initializer_list<int> v) {
  std::vector<bool> out;
  for (int x : v) out.push_back(x != 0);
  return out;
}

}  // namespace

TEST_CASE("score_bn_gamma") {
  auto g = two_layer({-0.5f, 0.01f}, {0.0f, 2.0f});
  auto s = score_bn_gamma(g);
  REQUIRE(s.entries.size() == 4);
  CHECK(s.entries[0].conv_id == "L1");
  CHECK(s.entries[0].score == doctest::Approx(0.5));
  CHECK(s.entries[1].score == doctest::Approx(0.01));
  CHECK(s.entries[2].score == 0.0);
  for (const auto& e : s.entries) CHECK(e.conv_id != "head");
}

TEST_CASE("score_bn_gamma requires a BatchNorm after every eligible conv") {
  auto g = two_layer({1, 1}, {1, 1});
  g.nodes[4] = Node{"bn2", Relu{}, {"L2"}};
  CHECK_THROWS_AS(score_bn_gamma(g), GraphError);
}

TEST_CASE("prunable_convs excludes heads reached through identity-like nodes") {
  auto g = fixtures::mini_resnet(1);
  auto p = prunable_convs(g);
  CHECK(std::find(p.begin(), p.end(), "fc") == p.end());
  CHECK(std::find(p.begin(), p.end(), "stem.conv") != p.end());
  CHECK(p.size() == g.conv_ids().size() - 1);
}

TEST_CASE("select_global") {
  auto g = two_layer({0.5f, 0.01f, 0.3f}, {0.02f, 0.4f});
  auto s = score_bn_gamma(g);
  auto m = select_global(g, s, 0.4);
  CHECK(m.at("L1") == bits({1, 0, 1}));
  CHECK(m.at("L2") == bits({0, 1}));
  CHECK(m.at("head") == bits({1, 1}));

  CHECK(select_global(g, s, 0.0) == FilterMask::all_kept(g));

  auto tie = two_layer({0.1f, 0.1f, 0.1f}, {5.0f, 5.0f});
  auto ts = score_bn_gamma(tie);
  ts.entries.resize(3);
  CHECK(select_global(tie, ts, 1.0 / 3.0).at("L1") == bits({0, 1, 1}));
  CHECK_THROWS(select_global(g, s, 1.0));
}

TEST_CASE("select_local") {
  auto g = two_layer({0.5f, 0.01f, 0.3f, 0.02f}, {0.2f, 0.1f, 0.3f});
  auto s = score_bn_gamma(g);
  auto m = select_local(g, s, 0.5);
  CHECK(m.at("L1") == bits({1, 0, 1, 0}));
  CHECK(m.at("L2") == bits({1, 0, 1}));
  CHECK(select_local(g, s, 0.0) == FilterMask::all_kept(g));
}

TEST_CASE("iteration_schedule") {
  auto s = iteration_schedule(0.9, 3);
  REQUIRE(s.size() == 3);
  CHECK(s[0] == doctest::Approx(0.3));
  CHECK(s[1] == doctest::Approx(0.6));
  CHECK(s[2] == doctest::Approx(0.9));
  CHECK(iteration_schedule(0.5, 1) == std::vector<double>{0.5});
  auto two = iteration_schedule(0.6, 2);
  CHECK(two[0] == doctest::Approx(0.3));
  CHECK(two[1] == doctest::Approx(0.6));
  CHECK_THROWS(iteration_schedule(0.5, 0));
}

TEST_CASE("smooth_l1_penalty") {
  CHECK(smooth_l1_penalty({0.5}, 1.0, 1.0) == doctest::Approx(0.125));
  CHECK(smooth_l1_penalty({2.0}, 1.0, 1.0) == doctest::Approx(1.5));
  CHECK(smooth_l1_penalty({0.5, 2.0}, 1e-5, 1.0) == doctest::Approx(1.625e-5));
  CHECK(smooth_l1_penalty({-2.0}, 1.0) == doctest::Approx(1.5));
}

TEST_CASE("smooth_l1_penalty is continuous and differentiable at the knee") {
  for (double delta : {0.1, 1.0, 3.0}) {
    const double h = 1e-7 * delta;
    auto f = [&](double z) { return smooth_l1_penalty({z}, 1.0, delta); };
    CHECK(f(delta - h) == doctest::Approx(f(delta + h)).epsilon(1e-6));
    const double left = (f(delta) - f(delta - h)) / h;
    const double right = (f(delta + h) - f(delta)) / h;
    CHECK(left == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(right == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("selection properties on random networks") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> rate(0.0, 0.95);
  for (int t = 0; t < 30; ++t) {
    auto g = fixtures::mini_resnet(rng());
    auto s = score_bn_gamma(g);
    const double r1 = rate(rng), r2 = rate(rng);
    const double lo = std::min(r1, r2), hi = std::max(r1, r2);
    for (auto scope : {PruningScope::kGlobal, PruningScope::kLocal}) {
      auto a = select(g, s, lo, scope);
      auto b = select(g, s, hi, scope);
      // Nested masks.
      for (const auto& [id, keep] : a.entries()) {
        const auto& other = b.at(id);
        for (std::size_t f = 0; f < keep.size(); ++f) CHECK((keep[f] || !other[f]));
      }
      // Scale invariance.
      auto scaled = s;
      for (auto& e : scaled.entries) e.score *= 3.7;
      CHECK(select(g, scaled, hi, scope) == b);
    }
    // Exact counts.
    const auto n = s.entries.size();
    CHECK(select_global(g, s, hi).pruned_count() ==
          static_cast<std::size_t>(std::floor(hi * static_cast<double>(n) + 1e-9)));
    std::size_t local = 0;
    for (const auto& id : prunable_convs(g)) {
      local += static_cast<std::size_t>(
          std::floor(hi * g.node(id).as<Conv2d>().out_channels + 1e-9));
    }
    CHECK(select_local(g, s, hi).pruned_count() == local);
  }
}

TEST_CASE("prune_count floors") {
  CHECK(prune_count(0.5, 3) == 1);
  CHECK(prune_count(0.29, 100) == 29);
  CHECK(prune_count(0.0, 10) == 0);
}
