// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace netshrink {

/// Dense row-major boolean matrix.
class BoolMatrix {
 public:
  BoolMatrix() = default;
  BoolMatrix(int rows, int cols, bool fill = false)
      : rows_(rows), cols_(cols),
        cells_(static_cast<std::size_t>(rows) * cols, fill ? 1 : 0) {}

  static BoolMatrix identity(int n) {
    BoolMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.set(i, i, true);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool operator()(int r, int c) const {
    return cells_[static_cast<std::size_t>(r) * cols_ + c] != 0;
  }
  void set(int r, int c, bool v) {
    cells_[static_cast<std::size_t>(r) * cols_ + c] = v ? 1 : 0;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : cells_) n += v;
    return n;
  }
  bool any_in_row(int r) const {
    for (int c = 0; c < cols_; ++c) {
      if ((*this)(r, c)) return true;
    }
    return false;
  }

  friend bool operator==(const BoolMatrix&, const BoolMatrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Per-convolution outcome of the connectivity analysis.
struct ConvStructure {
  std::vector<bool> filter_keep;
  /// (out x in): kernel slice (o, i) has a non-null gradient.
  BoolMatrix slice_keep;
  std::vector<bool> bias_keep;
  /// No filter survives; the node can be deleted.
  bool removable = false;

  friend bool operator==(const ConvStructure&, const ConvStructure&) = default;
};

/// The completed mask m': filters, kernel slices and biases that stay
/// connected, plus the post-analysis keep pattern of every identity
/// convolution guarding an addition.
struct StructuralMask {
  std::vector<std::pair<std::string, ConvStructure>> convs;
  std::vector<std::pair<std::string, BoolMatrix>> identity_convs;

  const ConvStructure* find(std::string_view conv_id) const {
    for (const auto& [id, s] : convs) {
      if (id == conv_id) return &s;
    }
    return nullptr;
  }

  friend bool operator==(const StructuralMask&, const StructuralMask&) = default;
};

}  // namespace netshrink
