// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace netshrink {

/// Parameters of an indexation-addition c = a[i_a] + b[i_b].
///
/// Indices are 1-based; 0 marks "no contribution from this operand" for the
/// corresponding output channel. The output has `a_index.size()` channels.
struct IndexMap {
  std::vector<int> a_index;
  std::vector<int> b_index;
  int a_channels = 0;
  int b_channels = 0;

  int out_channels() const { return static_cast<int>(a_index.size()); }

  /// i_a = i_b = [1..n] with n_a = n_b = n_c: a plain element-wise addition.
  bool is_identity() const;

  static IndexMap identity(int channels);

  friend bool operator==(const IndexMap&, const IndexMap&) = default;
};

/// Returns one message per violated invariant (empty when the map is valid):
/// list lengths agree, entries in range, no output channel with both indices
/// 0, and nonzero entries strictly increasing per operand.
std::vector<std::string> check_index_map(const IndexMap& map);

}  // namespace netshrink
