// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netshrink/graph.hpp"

namespace netshrink {

/// Per-convolution filter keep vectors (true = keep), in insertion order.
class FilterMask {
 public:
  using Entry = std::pair<std::string, std::vector<bool>>;

  /// Keeps every filter of every Conv2d of `g`.
  static FilterMask all_kept(const Graph& g);

  /// Inserts or replaces the vector of `conv_id`.
  void set(std::string conv_id, std::vector<bool> keep);

  const std::vector<bool>* find(std::string_view conv_id) const;
  /// Throws MaskError when `conv_id` is absent.
  const std::vector<bool>& at(std::string_view conv_id) const;

  const std::vector<Entry>& entries() const { return entries_; }

  std::size_t pruned_count() const;
  std::size_t filter_count() const;

  friend bool operator==(const FilterMask&, const FilterMask&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Throws MaskError unless the mask covers exactly the Conv2d nodes of `g`
/// with vectors of length out_channels.
void check_mask(const Graph& g, const FilterMask& m);

}  // namespace netshrink
