// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "netshrink/abstraction.hpp"
#include "netshrink/fixtures.hpp"
#include "oracle.hpp"

using namespace netshrink;

namespace {

Conv2d conv(int out, int in, int k = 1) {
  Conv2d c;
  c.out_channels = out;
  c.in_channels = in;
  c.kernel_h = c.kernel_w = k;
  c.weights.assign(static_cast<std::size_t>(out) * in * k * k, 1.0f);
  return c;
}

// Input(2) -> c1(2->3) -> c2(3->2) -> Output.
Graph chain() {
  Graph g;
  g.input = {2, 3, 3};
  g.nodes = {{"x", Input{}, {}}, {"c1", conv(3, 2, 3), {"x"}}, {"c2", conv(2, 3, 3), {"c1"}},
             {"y", Output{}, {"c2"}}};
  g.outputs = {"y"};
  return g;
}

struct Analysis {
  AbstractGraph ag;
  ChannelLiveness live;
  StructuralMask sm;
};

Analysis analyze(const Graph& g, const FilterMask& m) {
  Analysis a{build_abstraction(g, m), {}, {}};
  a.live = connectivity_backward(a.ag, connectivity_forward(a.ag));
  a.sm = derive_structural_mask(a.ag, a.live);
  return a;
}

std::vector<bool> fwd(const Analysis& a, const std::string& id) {
  return a.live.forward[*a.ag.find(id)];
}

std::vector<bool> bits(std::initializer_list<int> v) {
  std::vector<bool> out;
  for (int x : v) out.push_back(x != 0);
  return out;
}

// Cell-for-cell comparison against the perturbation oracle.
void check_against_oracle(const Graph& g, const FilterMask& m, std::uint64_t seed) {
  const auto a = analyze(g, m);
  const auto pm = oracle::perturbation_mask(g, m, seed);
  for (const auto& [id, s] : a.sm.convs) {
    const auto& cells = pm.slices.at(id);
    for (int o = 0; o < s.slice_keep.rows(); ++o) {
      for (int i = 0; i < s.slice_keep.cols(); ++i) {
        INFO(id << " cell (" << o + 1 << ", " << i + 1 << ")");
        CHECK(s.slice_keep(o, i) == cells[o][i]);
      }
    }
  }
  for (const auto& [id, keep] : a.sm.identity_convs) {
    const auto add = id.substr(0, id.rfind('/'));
    const auto& probe = pm.guards.at(add + (id.back() == 'a' ? "/a" : "/b"));
    for (int c = 0; c < keep.rows(); ++c) {
      INFO(id << " channel " << c + 1);
      CHECK(keep(c, c) == probe[c]);
      for (int d = 0; d < keep.cols(); ++d) {
        if (d != c) CHECK_FALSE(keep(c, d));
      }
    }
  }
}

}  // namespace

TEST_CASE("build_abstraction") {
  auto g = chain();
  FilterMask m = FilterMask::all_kept(g);
  m.set("c1", {true, false, true});
  auto ag = build_abstraction(g, m);
  const auto& c1 = ag.nodes[*ag.find("c1")].connectivity;
  for (int i = 0; i < 2; ++i) {
    CHECK(c1(0, i));
    CHECK_FALSE(c1(1, i));
    CHECK(c1(2, i));
  }

  auto r = fixtures::mini_resnet(1);
  auto ar = build_abstraction(r, FilterMask::all_kept(r));
  CHECK(ar.nodes[*ar.find("stem.bn")].kind == AbstractKind::kPassThrough);
  CHECK(ar.identity_conv_count() == 6);

  auto rb1 = fixtures::rb1();
  auto a1 = build_abstraction(rb1, fixtures::rb1_mask(rb1));
  CHECK(a1.identity_conv_count() == 2);
}

TEST_CASE("insert_identity_convs") {
  auto g = chain();
  auto ag = build_abstraction(g, FilterMask::all_kept(g));
  CHECK(ag.identity_conv_count() == 0);
  CHECK(insert_identity_convs(ag).nodes.size() == ag.nodes.size());

  auto rb1 = fixtures::rb1();
  auto a1 = build_abstraction(rb1, FilterMask::all_kept(rb1));
  for (const auto* side : {"add/guard_a", "add/guard_b"}) {
    const auto& guard = a1.nodes[*a1.find(side)];
    CHECK(guard.kind == AbstractKind::kIdentityConv);
    CHECK(guard.connectivity == BoolMatrix::identity(3));
  }
  CHECK(insert_identity_convs(a1).nodes.size() == a1.nodes.size());

  // Add feeding Add.
  Graph n;
  n.input = {2, 3, 3};
  n.nodes = {{"x", Input{}, {}},
             {"c1", conv(2, 2), {"x"}},
             {"add1", Add{}, {"c1", "x"}},
             {"c2", conv(2, 2), {"add1"}},
             {"add2", Add{}, {"c2", "add1"}},
             {"y", Output{}, {"add2"}}};
  n.outputs = {"y"};
  CHECK(build_abstraction(n, FilterMask::all_kept(n)).identity_conv_count() == 4);
}

TEST_CASE("connectivity_forward") {
  auto g = chain();
  FilterMask m = FilterMask::all_kept(g);
  m.set("c1", {true, false, true});
  auto a = analyze(g, m);
  CHECK(fwd(a, "c1") == bits({1, 0, 1}));
  CHECK(fwd(a, "c2") == bits({1, 1}));

  m.set("c1", {false, false, false});
  auto dead = analyze(g, m);
  CHECK(fwd(dead, "c1") == bits({0, 0, 0}));
  CHECK(fwd(dead, "c2") == bits({0, 0}));
}

TEST_CASE("RB1 liveness at the addition matches the perturbation oracle") {
  auto g = fixtures::rb1();
  auto m = fixtures::rb1_mask(g);
  auto a = analyze(g, m);
  CHECK(fwd(a, "add") == bits({1, 1, 1}));
  CHECK(fwd(a, "add/guard_a") == bits({1, 0, 1}));
  CHECK(fwd(a, "add/guard_b") == bits({1, 1, 0}));

  auto pm = oracle::perturbation_mask(g, m, 1);
  CHECK(pm.guards.at("add/a") == bits({1, 0, 1}));
  CHECK(pm.guards.at("add/b") == bits({1, 1, 0}));
  check_against_oracle(g, m, 2);
}

TEST_CASE("connectivity_backward") {
  auto g = chain();
  FilterMask m = FilterMask::all_kept(g);
  m.set("c1", {true, false, true});
  auto a = analyze(g, m);
  const auto& c2 = *a.sm.find("c2");
  CHECK_FALSE(c2.slice_keep(0, 1));
  CHECK_FALSE(c2.slice_keep(1, 1));
  CHECK(c2.slice_keep(0, 0));
  CHECK(c2.slice_keep(1, 2));
  auto pm = oracle::perturbation_mask(g, m, 3);
  CHECK_FALSE(pm.slices.at("c2")[0][1]);
  CHECK_FALSE(pm.slices.at("c2")[1][1]);
  check_against_oracle(g, m, 3);

  auto all = analyze(g, FilterMask::all_kept(g));
  for (const auto& [id, s] : all.sm.convs) {
    CHECK(s.slice_keep.count() == static_cast<std::size_t>(s.slice_keep.rows() * s.slice_keep.cols()));
  }
}

TEST_CASE("RB1 with the whole conv3 pruned leaves conv2 without gradient") {
  auto g = fixtures::rb1();
  auto m = fixtures::rb1_mask(g);
  m.set("conv3", {false, false, false});
  auto a = analyze(g, m);
  CHECK(a.sm.find("conv2")->slice_keep.count() == 0);
  CHECK(a.sm.find("conv2")->removable);
  CHECK(a.sm.find("conv3")->removable);
  CHECK_FALSE(a.sm.find("conv1")->removable);

  auto pm = oracle::perturbation_mask(g, m, 4);
  for (const auto& row : pm.slices.at("conv2")) {
    for (bool cell : row) CHECK_FALSE(cell);
  }
  check_against_oracle(g, m, 4);
}

TEST_CASE("derive_structural_mask") {
  auto g = chain();
  FilterMask m = FilterMask::all_kept(g);
  m.set("c1", {true, false, true});
  auto a = analyze(g, m);
  const auto& c1 = *a.sm.find("c1");
  CHECK(c1.filter_keep == bits({1, 0, 1}));
  CHECK(c1.bias_keep == c1.filter_keep);
  CHECK_FALSE(c1.removable);

  auto all = analyze(g, FilterMask::all_kept(g));
  for (const auto& [id, s] : all.sm.convs) {
    CHECK(s.filter_keep == std::vector<bool>(s.filter_keep.size(), true));
  }
}

TEST_CASE("liveness_table lists every abstract node") {
  auto g = fixtures::rb1();
  auto a = analyze(g, fixtures::rb1_mask(g));
  auto table = liveness_table(a.ag, a.live);
  CHECK(table.find("add/guard_a") != std::string::npos);
  CHECK(table.find("101 / 111") != std::string::npos);
}

TEST_CASE("structural mask equals the perturbation oracle on random graphs") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 40; ++t) {
    auto g = fixtures::random_residual_graph(rng, {.max_channels = 5, .extras = true});
    auto m = fixtures::random_mask(g, rng);
    check_against_oracle(g, m, rng());
  }
}

TEST_CASE("structural mask properties") {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 60; ++t) {
    auto g = fixtures::random_residual_graph(rng, {.extras = true});
    auto m = fixtures::random_mask(g, rng);
    auto a = analyze(g, m);

    // Invariants.
    for (const auto& [id, s] : a.sm.convs) {
      for (int o = 0; o < s.slice_keep.rows(); ++o) {
        CHECK(s.filter_keep[o] == s.slice_keep.any_in_row(o));
        if (!m.at(id)[o]) CHECK_FALSE(s.filter_keep[o]);
      }
    }

    // Idempotence.
    FilterMask again;
    for (const auto& [id, s] : a.sm.convs) again.set(id, s.filter_keep);
    CHECK(analyze(g, again).sm == a.sm);

    // Monotonicity: keeping more filters never loses a cell.
    FilterMask more = m;
    for (const auto& [id, keep] : m.entries()) {
      auto k = keep;
      for (std::size_t f = 0; f < k.size(); ++f) k[f] = k[f] || (rng() % 3 == 0);
      more.set(id, k);
    }
    auto b = analyze(g, more);
    for (const auto& [id, s] : a.sm.convs) {
      const auto& bigger = b.sm.find(id)->slice_keep;
      for (int o = 0; o < s.slice_keep.rows(); ++o) {
        for (int i = 0; i < s.slice_keep.cols(); ++i) {
          if (s.slice_keep(o, i)) CHECK(bigger(o, i));
        }
      }
    }
  }
}
