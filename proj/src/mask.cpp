// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include "netshrink/mask.hpp"

#include <algorithm>

#include "netshrink/errors.hpp"

namespace netshrink {

FilterMask FilterMask::all_kept(const Graph& g) {
  FilterMask m;
  for (const auto& node : g.nodes) {
    if (const auto* c = std::get_if<Conv2d>(&node.kind)) {
      m.set(node.id, std::vector<bool>(c->out_channels, true));
    }
  }
  return m;
}

void FilterMask::set(std::string conv_id, std::vector<bool> keep) {
  for (auto& e : entries_) {
    if (e.first == conv_id) {
      e.second = std::move(keep);
      return;
    }
  }
  entries_.emplace_back(std::move(conv_id), std::move(keep));
}

const std::vector<bool>* FilterMask::find(std::string_view conv_id) const {
  for (const auto& e : entries_) {
    if (e.first == conv_id) return &e.second;
  }
  return nullptr;
}

const std::vector<bool>& FilterMask::at(std::string_view conv_id) const {
  if (const auto* v = find(conv_id)) return *v;
  throw MaskError("mask has no entry for convolution '" + std::string(conv_id) + "'");
}

std::size_t FilterMask::pruned_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    n += static_cast<std::size_t>(std::count(e.second.begin(), e.second.end(), false));
  }
  return n;
}

std::size_t FilterMask::filter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

void check_mask(const Graph& g, const FilterMask& m) {
  std::size_t convs = 0;
  for (const auto& node : g.nodes) {
    const auto* c = std::get_if<Conv2d>(&node.kind);
    if (!c) continue;
    ++convs;
    const auto* keep = m.find(node.id);
    if (!keep) {
      throw MaskError("mask has no entry for convolution '" + node.id + "'");
    }
    if (keep->size() != static_cast<std::size_t>(c->out_channels)) {
      throw MaskError("mask for '" + node.id + "' has " + std::to_string(keep->size()) +
                      " entries but the convolution has " +
                      std::to_string(c->out_channels) + " filters");
    }
  }
  if (m.entries().size() != convs) {
    for (const auto& [id, keep] : m.entries()) {
      auto i = g.find(id);
      if (!i || !g.nodes[*i].is<Conv2d>()) {
        throw MaskError("mask entry '" + id + "' is not a convolution of the graph");
      }
    }
  }
}

}  // namespace netshrink
