// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "netshrink/graph.hpp"
#include "netshrink/mask.hpp"

namespace netshrink {

/// Before/after accounting of one shrink.
///
/// Compression rates follow total / (total - removed): over filters this is
/// the rate implied by the mask alone, over parameters it is what the shrunk
/// network actually achieves. IndexAdd index lists are metadata and never
/// counted as parameters.
struct ShrinkReport {
  std::int64_t filters_total = 0;
  std::int64_t filters_pruned = 0;
  std::int64_t params_before = 0;
  std::int64_t params_after = 0;
  std::int64_t macs_before = 0;
  std::int64_t macs_after = 0;
  double filter_compression = 1.0;
  double param_compression = 1.0;

  /// Fraction of parameters removed, 1 - params_after / params_before.
  double param_pruning_rate() const;
};

/// Throws Error when the shrunk graph has no parameters left or every filter
/// is pruned.
ShrinkReport compression_report(const Graph& before, const Graph& after, const FilterMask& m);

/// Deterministic JSON document of the report.
std::string report_document(const ShrinkReport& r);

}  // namespace netshrink
