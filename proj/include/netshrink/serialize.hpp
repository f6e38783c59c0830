// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

// Text documents for graphs, filter masks and tensors.
//
// Graph document (JSON, keys always written in this order):
//
//   {"version": 1,
//    "weights_file": "model.bin",            // only with a sidecar
//    "input": {"channels": C, "height": H, "width": W},
//    "nodes": [{"id": ..., "kind": ..., <kind fields>, "inputs": [ids]}],
//    "outputs": [ids]}
//
// Float tensors are nested arrays ([out][in][kh][kw] for conv weights) or,
// with a sidecar, {"offset": n, "count": m} into a raw little-endian float32
// file. NaN and infinities are written as the strings "nan", "inf", "-inf".

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "netshrink/graph.hpp"
#include "netshrink/mask.hpp"
#include "netshrink/tensor.hpp"

namespace netshrink {

inline constexpr int kDocumentVersion = 1;

std::string serialize_graph(const Graph& g);

/// Parses a graph document. Throws ParseError (with a JSON path or byte
/// offset) on malformed input, unknown kinds or unknown fields. Semantic
/// problems such as NaN weights or channel mismatches are left to
/// validate_graph.
Graph deserialize_graph(std::string_view doc);

struct SidecarDocument {
  std::string text;
  std::vector<float> blob;
};

/// Writes every float tensor into `blob` and references it from `text`;
/// `sidecar_name` is recorded as "weights_file".
SidecarDocument serialize_graph_with_sidecar(const Graph& g,
                                             std::string_view sidecar_name);
Graph deserialize_graph(std::string_view doc, std::span<const float> sidecar);

/// Reads `path` and, if the document names a weights_file, the sidecar next
/// to it.
Graph load_graph(const std::filesystem::path& path);
/// With `sidecar`, weights go to `<path stem>.bin` beside the document.
void save_graph(const std::filesystem::path& path, const Graph& g,
                bool sidecar = false);

/// Mask document: {"<conv id>": [1, 0, ...], ...} in mask order.
std::string serialize_mask(const FilterMask& m);
FilterMask deserialize_mask(std::string_view doc);
FilterMask load_mask(const std::filesystem::path& path);
void save_mask(const std::filesystem::path& path, const FilterMask& m);

// Tensor streams. Text: optional '#' comment lines, then per tensor a
// "C H W" header line followed by C*H*W numbers. Binary: per tensor the
// magic "NSTN", three little-endian uint32 dims and the float32 data.
std::string tensors_to_text(std::span<const Tensor> tensors);
std::vector<Tensor> tensors_from_text(std::string_view text);
std::string tensors_to_binary(std::span<const Tensor> tensors);
std::vector<Tensor> tensors_from_binary(std::string_view bytes);

/// Detects the binary magic, otherwise parses text.
std::vector<Tensor> load_tensors(const std::filesystem::path& path);
/// Binary when the extension is ".bin", text otherwise.
void save_tensors(const std::filesystem::path& path,
                  std::span<const Tensor> tensors);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace netshrink
