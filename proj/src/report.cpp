// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include "netshrink/report.hpp"

#include <json.hpp>

#include "netshrink/errors.hpp"

namespace netshrink {

double ShrinkReport::param_pruning_rate() const {
  if (params_before == 0) return 0.0;
  return 1.0 - static_cast<double>(params_after) / static_cast<double>(params_before);
}

ShrinkReport compression_report(const Graph& before, const Graph& after, const FilterMask& m) {
  check_mask(before, m);
  ShrinkReport r;
  r.filters_total = static_cast<std::int64_t>(m.filter_count());
  r.filters_pruned = static_cast<std::int64_t>(m.pruned_count());
  r.params_before = count_params(before);
  r.params_after = count_params(after);
  r.macs_before = count_macs(before);
  r.macs_after = count_macs(after);
  if (r.params_after == 0) {
    throw Error("shrunk graph has no parameters left; the network collapsed");
  }
  if (r.filters_total == r.filters_pruned) throw Error("every filter is pruned");
  r.filter_compression = static_cast<double>(r.filters_total) /
                         static_cast<double>(r.filters_total - r.filters_pruned);
  r.param_compression =
      static_cast<double>(r.params_before) / static_cast<double>(r.params_after);
  return r;
}

std::string report_document(const ShrinkReport& r) {
  nlohmann::ordered_json doc;
  doc["filters_total"] = r.filters_total;
  doc["filters_pruned"] = r.filters_pruned;
  doc["params_before"] = r.params_before;
  doc["params_after"] = r.params_after;
  doc["macs_before"] = r.macs_before;
  doc["macs_after"] = r.macs_after;
  doc["filter_compression"] = r.filter_compression;
  doc["param_compression"] = r.param_compression;
  doc["param_pruning_rate"] = r.param_pruning_rate();
  return doc.dump(2) + "\n";
}

}  // namespace netshrink
