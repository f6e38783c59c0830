// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include "netshrink/shrinker.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <unordered_map>

#include <json.hpp>

namespace netshrink {

namespace {

std::vector<int> iota_channels(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

std::optional<int> position(const std::vector<int>& channels, int c) {
  auto it = std::lower_bound(channels.begin(), channels.end(), c);
  if (it == channels.end() || *it != c) return std::nullopt;
  return static_cast<int>(it - channels.begin());
}

[[noreturn]] void inconsistent(const std::string& node, const std::string& what) {
  throw GraphError("structural mask inconsistent with graph at '" + node + "': " + what);
}

// Materialized value of a source node in the graph being emitted.
struct Emitted {
  std::string tensor;
  std::vector<int> channels;
};

}  // namespace

std::string_view rewrite_kind_name(AdditionRewrite::Kind kind) {
  switch (kind) {
    case AdditionRewrite::Kind::kAdd: return "add";
    case AdditionRewrite::Kind::kIndexAdd: return "index_add";
    case AdditionRewrite::Kind::kBypass: return "bypass";
    case AdditionRewrite::Kind::kRemove: return "remove";
  }
  return "?";
}

IndexMapTable extract_index_maps(const AbstractGraph& ag, const ChannelLiveness& live) {
  IndexMapTable table;
  for (std::size_t n = 0; n < ag.nodes.size(); ++n) {
    const auto& node = ag.nodes[n];
    if (node.kind == AbstractKind::kIdentityConv) continue;
    std::vector<int> kept;
    if (node.kind == AbstractKind::kInput) {
      kept = iota_channels(node.channels);
    } else {
      for (int c = 0; c < node.channels; ++c) {
        if (live.forward[n][c] && live.backward[n][c]) kept.push_back(c);
      }
    }
    table.channels[node.id] = std::move(kept);
  }

  for (std::size_t n = 0; n < ag.nodes.size(); ++n) {
    const auto& node = ag.nodes[n];
    if (node.kind != AbstractKind::kAdd && node.kind != AbstractKind::kIndexAdd) continue;

    struct Side {
      std::size_t guard;
      std::size_t producer;
      const std::vector<int>* channels;
    };
    std::array<Side, 2> sides{};
    for (int s = 0; s < 2; ++s) {
      const auto guard = node.inputs[s];
      if (ag.nodes[guard].kind != AbstractKind::kIdentityConv) {
        throw GraphError("addition '" + node.id + "' is not guarded by identity convolutions");
      }
      const auto producer = ag.nodes[guard].inputs[0];
      sides[s] = {guard, producer, &table.channels.at(ag.nodes[producer].id)};
    }
    // Operand channel feeding output channel k, or -1.
    auto source_channel = [&](int s, int k) {
      if (node.kind == AbstractKind::kAdd) return k;
      const auto& idx = s == 0 ? node.index_map.a_index : node.index_map.b_index;
      return idx[k] - 1;
    };
    // Diagonal cell (c, c) of the analyzed identity convolution.
    auto guard_keeps = [&](int s, int c) {
      return live.forward[sides[s].producer][c] && live.backward[sides[s].guard][c];
    };

    const auto& out_channels = table.channels.at(node.id);
    std::array<std::vector<int>, 2> index;
    std::array<bool, 2> contributes{false, false};
    for (int k : out_channels) {
      bool any = false;
      for (int s = 0; s < 2; ++s) {
        const int c = source_channel(s, k);
        int entry = 0;
        if (c >= 0 && guard_keeps(s, c)) {
          auto p = position(*sides[s].channels, c);
          if (!p) {
            inconsistent(node.id, "guarded channel " + std::to_string(c + 1) +
                                      " missing from its producer");
          }
          entry = *p + 1;
          any = contributes[s] = true;
        }
        index[s].push_back(entry);
      }
      if (!any) {
        inconsistent(node.id, "live output channel " + std::to_string(k + 1) +
                                  " has no live operand");
      }
    }

    AdditionRewrite rw;
    const int na = static_cast<int>(sides[0].channels->size());
    const int nb = static_cast<int>(sides[1].channels->size());
    const int nc = static_cast<int>(out_channels.size());
    if (nc == 0) {
      rw.kind = AdditionRewrite::Kind::kRemove;
    } else if (contributes[0] && contributes[1]) {
      rw.map = IndexMap{index[0], index[1], na, nb};
      rw.kind = rw.map.is_identity() ? AdditionRewrite::Kind::kAdd
                                     : AdditionRewrite::Kind::kIndexAdd;
    } else {
      const int s = contributes[0] ? 0 : 1;
      const int n_side = s == 0 ? na : nb;
      const bool whole = nc == n_side && std::equal(index[s].begin(), index[s].end(),
                                                    iota_channels(nc).begin(),
                                                    [](int a, int b) { return a == b + 1; });
      if (whole) {
        rw.kind = AdditionRewrite::Kind::kBypass;
        rw.bypass_input = s;
      } else {
        rw.kind = AdditionRewrite::Kind::kIndexAdd;
        rw.operands = {s, s};
        rw.map = IndexMap{index[s], std::vector<int>(nc, 0), n_side, n_side};
      }
    }
    table.additions.emplace(node.id, std::move(rw));
  }
  return table;
}

Graph rewrite_graph(const Graph& g, const StructuralMask& m_prime, const IndexMapTable& maps) {
  require_valid(g);
  const auto shapes = infer_shapes(g, g.input.height, g.input.width);

  Graph out;
  out.input = g.input;
  out.outputs = g.outputs;

  std::set<std::string> used;
  for (const auto& n : g.nodes) used.insert(n.id);
  auto fresh_id = [&](const std::string& base) {
    std::string id = base;
    for (int k = 2; used.count(id); ++k) id = base + "_" + std::to_string(k);
    used.insert(id);
    return id;
  };

  std::unordered_map<std::string, std::optional<Emitted>> mat;
  auto wanted_channels = [&](const std::string& id) -> const std::vector<int>& {
    auto it = maps.channels.find(id);
    if (it == maps.channels.end()) inconsistent(id, "index map table has no channel entry");
    return it->second;
  };
  auto input_of = [&](const Node& node, std::size_t k) -> const Emitted& {
    const auto& e = mat.at(node.inputs[k]);
    if (!e) inconsistent(node.id, "input '" + node.inputs[k] + "' was removed");
    return *e;
  };
  // Channel subset of `e` as a selection IndexAdd(x, x, i_a = positions, i_b = 0).
  auto select = [&](const Emitted& e, const std::vector<int>& wanted,
                    const std::string& consumer) -> Emitted {
    if (wanted == e.channels) return e;
    IndexMap map;
    map.a_channels = map.b_channels = static_cast<int>(e.channels.size());
    for (int c : wanted) {
      auto p = position(e.channels, c);
      if (!p) inconsistent(consumer, "needs channel " + std::to_string(c + 1) + " of its input");
      map.a_index.push_back(*p + 1);
      map.b_index.push_back(0);
    }
    const auto id = fresh_id(consumer + "/select");
    out.nodes.push_back(Node{id, IndexAdd{std::move(map)}, {e.tensor, e.tensor}});
    return Emitted{id, wanted};
  };

  for (std::size_t idx = 0; idx < g.nodes.size(); ++idx) {
    const Node& node = g.nodes[idx];
    const std::string& id = node.id;

    if (node.is<Input>()) {
      out.nodes.push_back(node);
      mat[id] = Emitted{id, iota_channels(g.input.channels)};
      continue;
    }

    if (const auto* conv = std::get_if<Conv2d>(&node.kind)) {
      const auto* cs = m_prime.find(id);
      if (!cs) inconsistent(id, "no structural mask entry");
      if (cs->slice_keep.rows() != conv->out_channels ||
          cs->slice_keep.cols() != conv->in_channels ||
          cs->filter_keep.size() != static_cast<std::size_t>(conv->out_channels)) {
        inconsistent(id, "mask dimensions differ from the convolution");
      }
      std::vector<int> rows;
      for (int o = 0; o < conv->out_channels; ++o) {
        if (cs->filter_keep[o]) rows.push_back(o);
      }
      if (rows.empty()) {
        mat[id] = std::nullopt;
        continue;
      }
      std::vector<int> cols;
      for (int i = 0; i < conv->in_channels; ++i) {
        if (cs->slice_keep(rows[0], i)) cols.push_back(i);
      }
      for (int o = 0; o < conv->out_channels; ++o) {
        for (int i = 0; i < conv->in_channels; ++i) {
          const bool expect = cs->filter_keep[o] && position(cols, i).has_value();
          if (cs->slice_keep(o, i) != expect) {
            inconsistent(id, "kernel slices of kept filters do not share one input set");
          }
        }
      }
      const Emitted& in = input_of(node, 0);
      if (in.channels != cols) inconsistent(id, "kept kernel slices differ from live inputs");

      Conv2d shrunk = *conv;
      shrunk.out_channels = static_cast<int>(rows.size());
      shrunk.in_channels = static_cast<int>(cols.size());
      shrunk.weights.clear();
      for (int o : rows) {
        for (int i : cols) {
          for (int kh = 0; kh < conv->kernel_h; ++kh) {
            for (int kw = 0; kw < conv->kernel_w; ++kw) {
              shrunk.weights.push_back(conv->weight(o, i, kh, kw));
            }
          }
        }
      }
      if (conv->bias) {
        shrunk.bias->clear();
        for (int o : rows) shrunk.bias->push_back((*conv->bias)[o]);
      }
      out.nodes.push_back(Node{id, std::move(shrunk), {in.tensor}});
      mat[id] = Emitted{id, rows};
      continue;
    }

    if (node.is<Output>()) {
      const Emitted& in = input_of(node, 0);
      if (in.channels != iota_channels(shapes[idx].channels)) {
        inconsistent(id, "output channels were removed (layer collapse)");
      }
      out.nodes.push_back(Node{id, Output{}, {in.tensor}});
      mat[id] = Emitted{id, in.channels};
      continue;
    }

    if (node.is<BatchNorm2d>() || node.is<Relu>() || node.is<Upsample>() ||
        node.is<GlobalAvgPool>()) {
      const auto& wanted = wanted_channels(id);
      if (wanted.empty()) {
        mat[id] = std::nullopt;
        continue;
      }
      const Emitted in = select(input_of(node, 0), wanted, id);
      Node shrunk{id, node.kind, {in.tensor}};
      if (auto* bn = std::get_if<BatchNorm2d>(&shrunk.kind)) {
        const auto& src = node.as<BatchNorm2d>();
        auto gather = [&](const std::vector<float>& v) {
          std::vector<float> r;
          for (int c : wanted) r.push_back(v[c]);
          return r;
        };
        bn->gamma = gather(src.gamma);
        bn->beta = gather(src.beta);
        bn->running_mean = gather(src.running_mean);
        bn->running_var = gather(src.running_var);
      }
      out.nodes.push_back(std::move(shrunk));
      mat[id] = Emitted{id, wanted};
      continue;
    }

    if (node.is<Concat>()) {
      const auto& wanted = wanted_channels(id);
      std::vector<Emitted> parts;
      int offset = 0;
      for (std::size_t k = 0; k < node.inputs.size(); ++k) {
        const int n = shapes[*g.find(node.inputs[k])].channels;
        std::vector<int> seg;
        for (int c : wanted) {
          if (c >= offset && c < offset + n) seg.push_back(c - offset);
        }
        offset += n;
        if (seg.empty()) continue;
        parts.push_back(select(input_of(node, k), seg, id));
      }
      if (parts.empty()) {
        mat[id] = std::nullopt;
      } else if (parts.size() == 1) {
        mat[id] = Emitted{parts[0].tensor, wanted};
      } else {
        Node cat{id, Concat{}, {}};
        for (const auto& p : parts) cat.inputs.push_back(p.tensor);
        out.nodes.push_back(std::move(cat));
        mat[id] = Emitted{id, wanted};
      }
      continue;
    }

    // Add / IndexAdd
    auto it = maps.additions.find(id);
    if (it == maps.additions.end()) inconsistent(id, "no addition rewrite");
    const AdditionRewrite& rw = it->second;
    const auto& wanted = wanted_channels(id);
    switch (rw.kind) {
      case AdditionRewrite::Kind::kRemove:
        mat[id] = std::nullopt;
        break;
      case AdditionRewrite::Kind::kBypass: {
        const Emitted& in = input_of(node, static_cast<std::size_t>(rw.bypass_input));
        if (in.channels.size() != wanted.size()) inconsistent(id, "bypass changes channel count");
        mat[id] = Emitted{in.tensor, wanted};
        break;
      }
      case AdditionRewrite::Kind::kAdd:
      case AdditionRewrite::Kind::kIndexAdd: {
        const Emitted& a = input_of(node, static_cast<std::size_t>(rw.operands[0]));
        const Emitted& b = input_of(node, static_cast<std::size_t>(rw.operands[1]));
        if (static_cast<int>(a.channels.size()) != rw.map.a_channels ||
            static_cast<int>(b.channels.size()) != rw.map.b_channels ||
            rw.map.out_channels() != static_cast<int>(wanted.size())) {
          inconsistent(id, "index map does not fit its operands");
        }
        if (rw.kind == AdditionRewrite::Kind::kAdd) {
          out.nodes.push_back(Node{id, Add{}, {a.tensor, b.tensor}});
        } else {
          out.nodes.push_back(Node{id, IndexAdd{rw.map}, {a.tensor, b.tensor}});
        }
        mat[id] = Emitted{id, wanted};
        break;
      }
    }
  }
  return out;
}

std::string CollapseReport::describe() const {
  if (!collapsed) return "no collapse";
  std::string s = "disconnected output channels:";
  for (const auto& d : dead_outputs) s += " " + d;
  if (!cut_nodes.empty()) {
    s += "; cut upstream:";
    for (const auto& c : cut_nodes) s += " " + c;
  }
  return s;
}

CollapseReport detect_collapse(const StructuralMask& m_prime, const Graph& g) {
  CollapseReport report;
  std::unordered_map<std::string, std::vector<bool>> present;
  for (const auto& id : topo_order(g)) {
    const Node& node = g.node(id);
    std::vector<const std::vector<bool>*> in;
    for (const auto& src : node.inputs) in.push_back(&present.at(src));
    std::vector<bool> here;
    if (node.is<Input>()) {
      here.assign(g.input.channels, true);
    } else if (node.is<Conv2d>()) {
      const auto* cs = m_prime.find(id);
      if (!cs) inconsistent(id, "no structural mask entry");
      here = cs->filter_keep;
    } else if (node.is<Add>()) {
      here = *in[0];
      for (std::size_t k = 0; k < here.size(); ++k) here[k] = here[k] || (*in[1])[k];
    } else if (const auto* ia = std::get_if<IndexAdd>(&node.kind)) {
      const auto& map = ia->index_map;
      here.assign(map.out_channels(), false);
      for (int k = 0; k < map.out_channels(); ++k) {
        here[k] = (map.a_index[k] && (*in[0])[map.a_index[k] - 1]) ||
                  (map.b_index[k] && (*in[1])[map.b_index[k] - 1]);
      }
    } else if (node.is<Concat>()) {
      for (const auto* v : in) here.insert(here.end(), v->begin(), v->end());
    } else {
      here = *in[0];
    }
    if (node.is<Output>()) {
      for (std::size_t c = 0; c < here.size(); ++c) {
        if (!here[c]) report.dead_outputs.push_back(id + "[" + std::to_string(c + 1) + "]");
      }
    }
    present.emplace(id, std::move(here));
  }
  report.collapsed = !report.dead_outputs.empty();
  if (!report.collapsed) return report;

  // Fully removed convolutions upstream of a dead output.
  std::set<std::string> seen;
  std::vector<std::string> stack;
  for (const auto& d : report.dead_outputs) stack.push_back(d.substr(0, d.find('[')));
  while (!stack.empty()) {
    auto id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    for (const auto& in : g.node(id).inputs) stack.push_back(in);
  }
  for (const auto& node : g.nodes) {
    if (!node.is<Conv2d>() || !seen.count(node.id)) continue;
    if (const auto* cs = m_prime.find(node.id); cs && cs->removable) {
      report.cut_nodes.push_back(node.id);
    }
  }
  return report;
}

ShrinkResult shrink_pipeline(const Graph& g, const FilterMask& m) {
  require_valid(g);
  check_mask(g, m);
  ShrinkResult r;
  r.abstraction = build_abstraction(g, m);
  r.liveness = connectivity_backward(r.abstraction, connectivity_forward(r.abstraction));
  r.structural_mask = derive_structural_mask(r.abstraction, r.liveness);
  if (auto collapse = detect_collapse(r.structural_mask, g); collapse.collapsed) {
    throw CollapseError(std::move(collapse));
  }
  r.index_maps = extract_index_maps(r.abstraction, r.liveness);
  r.graph = rewrite_graph(g, r.structural_mask, r.index_maps);
  r.report = compression_report(g, r.graph, m);
  return r;
}

std::string structural_mask_document(const StructuralMask& m_prime, const IndexMapTable& maps) {
  using json = nlohmann::ordered_json;
  auto bools = [](const std::vector<bool>& v) {
    json a = json::array();
    for (bool b : v) a.push_back(b ? 1 : 0);
    return a;
  };
  auto matrix = [](const BoolMatrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c) ? 1 : 0);
      rows.push_back(std::move(row));
    }
    return rows;
  };
  json doc;
  json convs = json::object();
  for (const auto& [id, s] : m_prime.convs) {
    convs[id] = {{"filter_keep", bools(s.filter_keep)},
                 {"slice_keep", matrix(s.slice_keep)},
                 {"bias_keep", bools(s.bias_keep)},
                 {"removable", s.removable}};
  }
  doc["convs"] = std::move(convs);
  json guards = json::object();
  for (const auto& [id, m] : m_prime.identity_convs) guards[id] = matrix(m);
  doc["identity_convs"] = std::move(guards);
  json adds = json::object();
  for (const auto& [id, rw] : maps.additions) {
    json a;
    a["rewrite"] = std::string(rewrite_kind_name(rw.kind));
    if (rw.kind == AdditionRewrite::Kind::kBypass) {
      a["bypass_input"] = rw.bypass_input;
    } else if (rw.kind != AdditionRewrite::Kind::kRemove) {
      a["operands"] = {rw.operands[0], rw.operands[1]};
      a["a_index"] = rw.map.a_index;
      a["b_index"] = rw.map.b_index;
      a["a_channels"] = rw.map.a_channels;
      a["b_channels"] = rw.map.b_channels;
    }
    adds[id] = std::move(a);
  }
  doc["additions"] = std::move(adds);
  json channels = json::object();
  for (const auto& [id, ch] : maps.channels) {
    json a = json::array();
    for (int c : ch) a.push_back(c + 1);
    channels[id] = std::move(a);
  }
  doc["channels"] = std::move(channels);
  return doc.dump(2) + "\n";
}

}  // namespace netshrink
