// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include "netshrink/abstraction.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "netshrink/errors.hpp"

namespace netshrink {

namespace {

bool is_addition(AbstractKind k) { return k == AbstractKind::kAdd || k == AbstractKind::kIndexAdd; }

std::string bits(const std::vector<bool>& v) {
  std::string s;
  for (bool b : v) s += b ? '1' : '0';
  return s;
}

}  // namespace

std::string_view abstract_kind_name(AbstractKind kind) {
  switch (kind) {
    case AbstractKind::kInput: return "Input";
    case AbstractKind::kConv: return "Conv";
    case AbstractKind::kIdentityConv: return "IdentityConv";
    case AbstractKind::kPassThrough: return "PassThrough";
    case AbstractKind::kAdd: return "Add";
    case AbstractKind::kIndexAdd: return "IndexAdd";
    case AbstractKind::kConcat: return "Concat";
    case AbstractKind::kOutput: return "Output";
  }
  return "?";
}

std::optional<std::size_t> AbstractGraph::find(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return i;
  }
  return std::nullopt;
}

std::size_t AbstractGraph::identity_conv_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes) n += node.kind == AbstractKind::kIdentityConv;
  return n;
}

AbstractGraph build_abstraction(const Graph& g, const FilterMask& m) {
  require_valid(g);
  check_mask(g, m);
  AbstractGraph ag;
  std::unordered_map<std::string, std::size_t> pos;
  for (const auto& id : topo_order(g)) {
    const Node& node = g.node(id);
    AbstractNode an;
    an.id = id;
    an.source = id;
    for (const auto& in : node.inputs) an.inputs.push_back(pos.at(in));
    auto in_channels = [&](std::size_t k) { return ag.nodes[an.inputs[k]].channels; };

    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Input>) {
            an.kind = AbstractKind::kInput;
            an.channels = g.input.channels;
          } else if constexpr (std::is_same_v<T, Conv2d>) {
            an.kind = AbstractKind::kConv;
            an.channels = k.out_channels;
            const auto& keep = m.at(id);
            an.connectivity = BoolMatrix(k.out_channels, k.in_channels);
            for (int o = 0; o < k.out_channels; ++o) {
              for (int i = 0; i < k.in_channels; ++i) an.connectivity.set(o, i, keep[o]);
            }
          } else if constexpr (std::is_same_v<T, Add>) {
            an.kind = AbstractKind::kAdd;
            an.channels = in_channels(0);
          } else if constexpr (std::is_same_v<T, IndexAdd>) {
            an.kind = AbstractKind::kIndexAdd;
            an.index_map = k.index_map;
            an.channels = k.index_map.out_channels();
          } else if constexpr (std::is_same_v<T, Concat>) {
            an.kind = AbstractKind::kConcat;
            for (std::size_t j = 0; j < an.inputs.size(); ++j) an.channels += in_channels(j);
          } else if constexpr (std::is_same_v<T, Output>) {
            an.kind = AbstractKind::kOutput;
            an.channels = in_channels(0);
          } else {
            an.kind = AbstractKind::kPassThrough;
            an.channels = in_channels(0);
          }
        },
        node.kind);
    pos.emplace(id, ag.nodes.size());
    ag.nodes.push_back(std::move(an));
  }
  return insert_identity_convs(std::move(ag));
}

AbstractGraph insert_identity_convs(AbstractGraph ag) {
  AbstractGraph out;
  std::vector<std::size_t> remap(ag.nodes.size());
  for (std::size_t i = 0; i < ag.nodes.size(); ++i) {
    AbstractNode node = std::move(ag.nodes[i]);
    for (auto& in : node.inputs) in = remap[in];
    if (is_addition(node.kind)) {
      for (std::size_t side = 0; side < node.inputs.size(); ++side) {
        const AbstractNode& producer = out.nodes[node.inputs[side]];
        if (producer.kind == AbstractKind::kIdentityConv && producer.source == node.id) continue;
        AbstractNode guard;
        guard.id = node.id + (side == 0 ? "/guard_a" : "/guard_b");
        guard.source = node.id;
        guard.kind = AbstractKind::kIdentityConv;
        guard.channels = producer.channels;
        guard.connectivity = BoolMatrix::identity(producer.channels);
        guard.inputs = {node.inputs[side]};
        node.inputs[side] = out.nodes.size();
        out.nodes.push_back(std::move(guard));
      }
    }
    remap[i] = out.nodes.size();
    out.nodes.push_back(std::move(node));
  }
  return out;
}

ChannelLiveness connectivity_forward(const AbstractGraph& ag) {
  ChannelLiveness live;
  auto& fwd = live.forward;
  fwd.resize(ag.nodes.size());
  for (std::size_t n = 0; n < ag.nodes.size(); ++n) {
    const auto& node = ag.nodes[n];
    auto& out = fwd[n];
    out.assign(node.channels, false);
    switch (node.kind) {
      case AbstractKind::kInput:
        out.assign(node.channels, true);
        break;
      case AbstractKind::kConv:
      case AbstractKind::kIdentityConv: {
        const auto& in = fwd[node.inputs[0]];
        const auto& c = node.connectivity;
        for (int o = 0; o < c.rows(); ++o) {
          for (int i = 0; i < c.cols() && !out[o]; ++i) out[o] = c(o, i) && in[i];
        }
        break;
      }
      case AbstractKind::kPassThrough:
      case AbstractKind::kOutput:
        out = fwd[node.inputs[0]];
        break;
      case AbstractKind::kAdd: {
        const auto& a = fwd[node.inputs[0]];
        const auto& b = fwd[node.inputs[1]];
        for (int k = 0; k < node.channels; ++k) out[k] = a[k] || b[k];
        break;
      }
      case AbstractKind::kIndexAdd: {
        const auto& a = fwd[node.inputs[0]];
        const auto& b = fwd[node.inputs[1]];
        const auto& map = node.index_map;
        for (int k = 0; k < node.channels; ++k) {
          out[k] = (map.a_index[k] && a[map.a_index[k] - 1]) ||
                   (map.b_index[k] && b[map.b_index[k] - 1]);
        }
        break;
      }
      case AbstractKind::kConcat: {
        std::size_t k = 0;
        for (auto in : node.inputs) {
          for (bool v : fwd[in]) out[k++] = v;
        }
        break;
      }
    }
  }
  return live;
}

ChannelLiveness connectivity_backward(const AbstractGraph& ag, ChannelLiveness live) {
  auto& bwd = live.backward;
  bwd.assign(ag.nodes.size(), {});
  for (std::size_t n = 0; n < ag.nodes.size(); ++n) {
    bwd[n].assign(ag.nodes[n].channels, ag.nodes[n].kind == AbstractKind::kOutput);
  }
  for (std::size_t n = ag.nodes.size(); n-- > 0;) {
    const auto& node = ag.nodes[n];
    const auto& out = bwd[n];
    switch (node.kind) {
      case AbstractKind::kInput:
        break;
      case AbstractKind::kConv:
      case AbstractKind::kIdentityConv: {
        auto& in = bwd[node.inputs[0]];
        const auto& c = node.connectivity;
        for (int i = 0; i < c.cols(); ++i) {
          for (int o = 0; o < c.rows() && !in[i]; ++o) in[i] = c(o, i) && out[o];
        }
        break;
      }
      case AbstractKind::kPassThrough:
      case AbstractKind::kOutput: {
        auto& in = bwd[node.inputs[0]];
        for (std::size_t k = 0; k < out.size(); ++k) in[k] = in[k] || out[k];
        break;
      }
      case AbstractKind::kAdd:
        for (auto src : node.inputs) {
          auto& in = bwd[src];
          for (std::size_t k = 0; k < out.size(); ++k) in[k] = in[k] || out[k];
        }
        break;
      case AbstractKind::kIndexAdd: {
        const auto& map = node.index_map;
        for (std::size_t k = 0; k < out.size(); ++k) {
          if (!out[k]) continue;
          if (map.a_index[k]) bwd[node.inputs[0]][map.a_index[k] - 1] = true;
          if (map.b_index[k]) bwd[node.inputs[1]][map.b_index[k] - 1] = true;
        }
        break;
      }
      case AbstractKind::kConcat: {
        std::size_t k = 0;
        for (auto src : node.inputs) {
          auto& in = bwd[src];
          for (std::size_t c = 0; c < in.size(); ++c, ++k) in[c] = in[c] || out[k];
        }
        break;
      }
    }
  }
  return live;
}

StructuralMask derive_structural_mask(const AbstractGraph& ag, const ChannelLiveness& live) {
  StructuralMask sm;
  for (std::size_t n = 0; n < ag.nodes.size(); ++n) {
    const auto& node = ag.nodes[n];
    if (node.kind != AbstractKind::kConv && node.kind != AbstractKind::kIdentityConv) continue;
    const auto& in = live.forward[node.inputs[0]];
    const auto& out = live.backward[n];
    const auto& c = node.connectivity;
    BoolMatrix keep(c.rows(), c.cols());
    for (int o = 0; o < c.rows(); ++o) {
      if (!out[o]) continue;
      for (int i = 0; i < c.cols(); ++i) keep.set(o, i, c(o, i) && in[i]);
    }
    if (node.kind == AbstractKind::kIdentityConv) {
      sm.identity_convs.emplace_back(node.id, std::move(keep));
      continue;
    }
    ConvStructure s;
    s.filter_keep.resize(c.rows());
    for (int o = 0; o < c.rows(); ++o) s.filter_keep[o] = keep.any_in_row(o);
    s.bias_keep = s.filter_keep;
    s.removable = std::find(s.filter_keep.begin(), s.filter_keep.end(), true) == s.filter_keep.end();
    s.slice_keep = std::move(keep);
    sm.convs.emplace_back(node.id, std::move(s));
  }
  return sm;
}

std::string liveness_table(const AbstractGraph& ag, const ChannelLiveness& live) {
  std::size_t width = 4;
  for (const auto& n : ag.nodes) width = std::max(width, n.id.size());
  std::ostringstream os;
  auto pad = [&](const std::string& s, std::size_t w) {
    return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
  };
  os << pad("node", width) << "  " << pad("kind", 12) << "  ch  forward / backward\n";
  for (std::size_t n = 0; n < ag.nodes.size(); ++n) {
    const auto& node = ag.nodes[n];
    os << pad(node.id, width) << "  " << pad(std::string(abstract_kind_name(node.kind)), 12)
       << "  " << pad(std::to_string(node.channels), 3) << " " << bits(live.forward[n])
       << " / " << (n < live.backward.size() ? bits(live.backward[n]) : std::string("-"))
       << "\n";
  }
  return os.str();
}

}  // namespace netshrink
