// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include "netshrink/serialize.hpp"

#include <array>
#include <cctype>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "netshrink/errors.hpp"

namespace netshrink {

using json = nlohmann::ordered_json;

namespace {

// Shortest decimal that round-trips through double and back to the same
// float; falls back to the exact double value of `f`.
json encode_float(float f) {
  if (std::isnan(f)) return "nan";
  if (std::isinf(f)) return f > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), f);
  const double d = std::strtod(std::string(buf.data(), res.ptr).c_str(), nullptr);
  if (std::bit_cast<std::uint32_t>(static_cast<float>(d)) ==
      std::bit_cast<std::uint32_t>(f)) {
    return d;
  }
  return static_cast<double>(f);
}

class TensorWriter {
 public:
  explicit TensorWriter(std::vector<float>* blob) : blob_(blob) {}

  json vector(const std::vector<float>& v) {
    if (blob_) return reference(v);
    json arr = json::array();
    for (float x : v) arr.push_back(encode_float(x));
    return arr;
  }

  json weights(const Conv2d& c) {
    if (blob_) return reference(c.weights);
    json outer = json::array();
    for (int o = 0; o < c.out_channels; ++o) {
      json per_in = json::array();
      for (int i = 0; i < c.in_channels; ++i) {
        json rows = json::array();
        for (int kh = 0; kh < c.kernel_h; ++kh) {
          json row = json::array();
          for (int kw = 0; kw < c.kernel_w; ++kw) {
            const auto idx = c.weight_index(o, i, kh, kw);
            row.push_back(encode_float(idx < c.weights.size() ? c.weights[idx] : 0.0f));
          }
          rows.push_back(std::move(row));
        }
        per_in.push_back(std::move(rows));
      }
      outer.push_back(std::move(per_in));
    }
    return outer;
  }

 private:
  json reference(const std::vector<float>& v) {
    json ref = json::object();
    ref["offset"] = blob_->size();
    ref["count"] = v.size();
    blob_->insert(blob_->end(), v.begin(), v.end());
    return ref;
  }

  std::vector<float>* blob_;
};

json index_list(const std::vector<int>& v) {
  json arr = json::array();
  for (int x : v) arr.push_back(x);
  return arr;
}

json graph_to_json(const Graph& g, std::vector<float>* blob,
                   std::string_view sidecar_name) {
  TensorWriter tw(blob);
  json doc = json::object();
  doc["version"] = kDocumentVersion;
  if (blob) doc["weights_file"] = std::string(sidecar_name);
  doc["input"] = {{"channels", g.input.channels},
                  {"height", g.input.height},
                  {"width", g.input.width}};
  json nodes = json::array();
  for (const auto& node : g.nodes) {
    json n = json::object();
    n["id"] = node.id;
    n["kind"] = std::string(kind_name(node.kind));
    if (const auto* c = std::get_if<Conv2d>(&node.kind)) {
      n["out_channels"] = c->out_channels;
      n["in_channels"] = c->in_channels;
      n["kernel"] = {c->kernel_h, c->kernel_w};
      n["stride"] = c->stride;
      n["padding"] = c->padding == Padding::kSame ? "same" : "valid";
      n["weights"] = tw.weights(*c);
      if (c->bias) n["bias"] = tw.vector(*c->bias);
    } else if (const auto* bn = std::get_if<BatchNorm2d>(&node.kind)) {
      n["gamma"] = tw.vector(bn->gamma);
      n["beta"] = tw.vector(bn->beta);
      n["running_mean"] = tw.vector(bn->running_mean);
      n["running_var"] = tw.vector(bn->running_var);
      n["eps"] = encode_float(bn->eps);
    } else if (const auto* ia = std::get_if<IndexAdd>(&node.kind)) {
      n["index_map"] = {{"a_index", index_list(ia->index_map.a_index)},
                        {"b_index", index_list(ia->index_map.b_index)},
                        {"a_channels", ia->index_map.a_channels},
                        {"b_channels", ia->index_map.b_channels}};
    } else if (const auto* up = std::get_if<Upsample>(&node.kind)) {
      n["factor"] = up->factor;
      n["mode"] = "nearest";
    }
    json inputs = json::array();
    for (const auto& in : node.inputs) inputs.push_back(in);
    n["inputs"] = std::move(inputs);
    nodes.push_back(std::move(n));
  }
  doc["nodes"] = std::move(nodes);
  json outputs = json::array();
  for (const auto& id : g.outputs) outputs.push_back(id);
  doc["outputs"] = std::move(outputs);
  return doc;
}

// ---------------------------------------------------------------------------
// Reading

class Reader {
 public:
  Reader(std::span<const float> sidecar, bool has_sidecar)
      : sidecar_(sidecar), has_sidecar_(has_sidecar) {}

  [[noreturn]] static void fail(const std::string& path, const std::string& msg) {
    throw ParseError(path, msg);
  }

  static void allow_keys(const json& obj, std::initializer_list<std::string_view> keys,
                         const std::string& path) {
    for (const auto& [k, v] : obj.items()) {
      bool ok = false;
      for (auto allowed : keys) ok = ok || k == allowed;
      if (!ok) fail(path + "." + k, "unknown field");
    }
  }

  static const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing required field");
    return *it;
  }

  static int integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < INT32_MIN || x > INT32_MAX) fail(path, "integer out of range");
    return static_cast<int>(x);
  }

  static std::string string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  static float number(const json& v, const std::string& path) {
    if (v.is_number()) return static_cast<float>(v.get<double>());
    if (v.is_string()) {
      const auto& s = v.get_ref<const std::string&>();
      if (s == "nan") return std::nanf("");
      if (s == "inf") return INFINITY;
      if (s == "-inf") return -INFINITY;
    }
    fail(path, "expected a number");
  }

  std::vector<float> vector(const json& v, const std::string& path) const {
    if (v.is_object()) return reference(v, path);
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<float> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  std::vector<float> weights(const json& v, const std::string& path,
                             const std::array<int, 4>& dims) const {
    if (v.is_object()) return reference(v, path);
    std::vector<float> out;
    flatten(v, path, dims, 0, out);
    return out;
  }

 private:
  void flatten(const json& v, const std::string& path, const std::array<int, 4>& dims,
               std::size_t depth, std::vector<float>& out) const {
    if (depth == dims.size()) {
      out.push_back(number(v, path));
      return;
    }
    if (!v.is_array()) fail(path, "expected a nested array of depth 4");
    if (v.size() != static_cast<std::size_t>(dims[depth])) {
      fail(path, "weights extent " + std::to_string(v.size()) + " at depth " +
                     std::to_string(depth) + " does not match declared " +
                     std::to_string(dims[depth]));
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      flatten(v[i], path + "[" + std::to_string(i) + "]", dims, depth + 1, out);
    }
  }

  std::vector<float> reference(const json& v, const std::string& path) const {
    if (!has_sidecar_) fail(path, "tensor reference but no weights_file sidecar");
    allow_keys(v, {"offset", "count"}, path);
    const auto offset = field(v, "offset", path);
    const auto count = field(v, "count", path);
    if (!offset.is_number_unsigned() || !count.is_number_unsigned()) {
      fail(path, "offset/count must be non-negative integers");
    }
    const auto o = offset.get<std::uint64_t>();
    const auto c = count.get<std::uint64_t>();
    if (o > sidecar_.size() || c > sidecar_.size() - o) {
      fail(path, "tensor reference exceeds sidecar size " + std::to_string(sidecar_.size()));
    }
    return {sidecar_.begin() + static_cast<std::ptrdiff_t>(o),
            sidecar_.begin() + static_cast<std::ptrdiff_t>(o + c)};
  }

  std::span<const float> sidecar_;
  bool has_sidecar_;
};

std::vector<int> int_list(const json& v, const std::string& path) {
  if (!v.is_array()) Reader::fail(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(Reader::integer(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Node node_from_json(const json& n, const std::string& path, const Reader& r) {
  if (!n.is_object()) Reader::fail(path, "expected an object");
  Node node;
  node.id = Reader::string(Reader::field(n, "id", path), path + ".id");
  const std::string kind = Reader::string(Reader::field(n, "kind", path), path + ".kind");
  const json& inputs = Reader::field(n, "inputs", path);
  if (!inputs.is_array()) Reader::fail(path + ".inputs", "expected an array of ids");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    node.inputs.push_back(
        Reader::string(inputs[i], path + ".inputs[" + std::to_string(i) + "]"));
  }

  auto f = [&](const char* key) -> const json& { return Reader::field(n, key, path); };
  auto p = [&](const char* key) { return path + "." + key; };

  if (kind == "Input") {
    Reader::allow_keys(n, {"id", "kind", "inputs"}, path);
    node.kind = Input{};
  } else if (kind == "Conv2d") {
    Reader::allow_keys(n, {"id", "kind", "out_channels", "in_channels", "kernel", "stride",
                           "padding", "weights", "bias", "inputs"},
                       path);
    Conv2d c;
    c.out_channels = Reader::integer(f("out_channels"), p("out_channels"));
    c.in_channels = Reader::integer(f("in_channels"), p("in_channels"));
    const auto kernel = int_list(f("kernel"), p("kernel"));
    if (kernel.size() != 2) Reader::fail(p("kernel"), "expected [kernel_h, kernel_w]");
    c.kernel_h = kernel[0];
    c.kernel_w = kernel[1];
    c.stride = Reader::integer(f("stride"), p("stride"));
    const auto pad = Reader::string(f("padding"), p("padding"));
    if (pad == "same") {
      c.padding = Padding::kSame;
    } else if (pad == "valid") {
      c.padding = Padding::kValid;
    } else {
      Reader::fail(p("padding"), "expected \"same\" or \"valid\"");
    }
    if (c.out_channels < 0 || c.in_channels < 0 || c.kernel_h < 0 || c.kernel_w < 0) {
      Reader::fail(path, "negative convolution dimension");
    }
    c.weights = r.weights(f("weights"), p("weights"),
                          {c.out_channels, c.in_channels, c.kernel_h, c.kernel_w});
    if (n.contains("bias")) c.bias = r.vector(n.at("bias"), p("bias"));
    node.kind = std::move(c);
  } else if (kind == "BatchNorm2d") {
    Reader::allow_keys(n, {"id", "kind", "gamma", "beta", "running_mean", "running_var",
                           "eps", "inputs"},
                       path);
    BatchNorm2d bn;
    bn.gamma = r.vector(f("gamma"), p("gamma"));
    bn.beta = r.vector(f("beta"), p("beta"));
    bn.running_mean = r.vector(f("running_mean"), p("running_mean"));
    bn.running_var = r.vector(f("running_var"), p("running_var"));
    bn.eps = Reader::number(f("eps"), p("eps"));
    node.kind = std::move(bn);
  } else if (kind == "ReLU") {
    Reader::allow_keys(n, {"id", "kind", "inputs"}, path);
    node.kind = Relu{};
  } else if (kind == "Add") {
    Reader::allow_keys(n, {"id", "kind", "inputs"}, path);
    node.kind = Add{};
  } else if (kind == "IndexAdd") {
    Reader::allow_keys(n, {"id", "kind", "index_map", "inputs"}, path);
    const json& m = f("index_map");
    const std::string mp = p("index_map");
    Reader::allow_keys(m, {"a_index", "b_index", "a_channels", "b_channels"}, mp);
    IndexAdd ia;
    ia.index_map.a_index = int_list(Reader::field(m, "a_index", mp), mp + ".a_index");
    ia.index_map.b_index = int_list(Reader::field(m, "b_index", mp), mp + ".b_index");
    ia.index_map.a_channels =
        Reader::integer(Reader::field(m, "a_channels", mp), mp + ".a_channels");
    ia.index_map.b_channels =
        Reader::integer(Reader::field(m, "b_channels", mp), mp + ".b_channels");
    node.kind = std::move(ia);
  } else if (kind == "Concat") {
    Reader::allow_keys(n, {"id", "kind", "inputs"}, path);
    node.kind = Concat{};
  } else if (kind == "Upsample") {
    Reader::allow_keys(n, {"id", "kind", "factor", "mode", "inputs"}, path);
    Upsample up;
    up.factor = Reader::integer(f("factor"), p("factor"));
    if (n.contains("mode") && Reader::string(n.at("mode"), p("mode")) != "nearest") {
      Reader::fail(p("mode"), "only \"nearest\" upsampling is supported");
    }
    node.kind = up;
  } else if (kind == "GlobalAvgPool") {
    Reader::allow_keys(n, {"id", "kind", "inputs"}, path);
    node.kind = GlobalAvgPool{};
  } else if (kind == "Output") {
    Reader::allow_keys(n, {"id", "kind", "inputs"}, path);
    node.kind = Output{};
  } else {
    Reader::fail(p("kind"), "unknown node kind '" + kind + "'");
  }
  return node;
}

json parse_json(std::string_view doc) {
  try {
    return json::parse(doc.begin(), doc.end());
  } catch (const json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), e.what());
  }
}

Graph graph_from_json(const json& doc, std::span<const float> sidecar, bool has_sidecar) {
  const std::string root = "$";
  if (!doc.is_object()) Reader::fail(root, "expected a JSON object");
  Reader::allow_keys(doc, {"version", "weights_file", "input", "nodes", "outputs"}, root);
  const int version = Reader::integer(Reader::field(doc, "version", root), "$.version");
  if (version != kDocumentVersion) {
    Reader::fail("$.version", "unsupported version " + std::to_string(version));
  }
  if (doc.contains("weights_file") && !has_sidecar) {
    Reader::fail("$.weights_file", "document needs its sidecar; use load_graph");
  }
  Reader r(sidecar, has_sidecar);
  Graph g;
  const json& in = Reader::field(doc, "input", root);
  Reader::allow_keys(in, {"channels", "height", "width"}, "$.input");
  g.input.channels = Reader::integer(Reader::field(in, "channels", "$.input"), "$.input.channels");
  g.input.height = Reader::integer(Reader::field(in, "height", "$.input"), "$.input.height");
  g.input.width = Reader::integer(Reader::field(in, "width", "$.input"), "$.input.width");

  const json& nodes = Reader::field(doc, "nodes", root);
  if (!nodes.is_array()) Reader::fail("$.nodes", "expected an array");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    g.nodes.push_back(node_from_json(nodes[i], "$.nodes[" + std::to_string(i) + "]", r));
  }
  const json& outputs = Reader::field(doc, "outputs", root);
  if (!outputs.is_array()) Reader::fail("$.outputs", "expected an array");
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    g.outputs.push_back(Reader::string(outputs[i], "$.outputs[" + std::to_string(i) + "]"));
  }
  return g;
}

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
}

void append_u32(std::string& out, std::uint32_t v) {
  v = to_le(v);
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

std::uint32_t read_u32(std::string_view bytes, std::size_t& pos) {
  if (pos + 4 > bytes.size()) throw ParseError("byte " + std::to_string(pos), "truncated");
  std::uint32_t v;
  std::memcpy(&v, bytes.data() + pos, 4);
  pos += 4;
  return to_le(v);
}

std::string blob_bytes(std::span<const float> blob) {
  std::string out;
  out.reserve(blob.size() * 4);
  for (float f : blob) append_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

std::vector<float> blob_floats(std::string_view bytes) {
  if (bytes.size() % 4 != 0) throw ParseError("sidecar", "size is not a multiple of 4");
  std::vector<float> out;
  out.reserve(bytes.size() / 4);
  std::size_t pos = 0;
  while (pos < bytes.size()) out.push_back(std::bit_cast<float>(read_u32(bytes, pos)));
  return out;
}

constexpr std::string_view kTensorMagic = "NSTN";

}  // namespace

std::string serialize_graph(const Graph& g) {
  return graph_to_json(g, nullptr, {}).dump(2) + "\n";
}

Graph deserialize_graph(std::string_view doc) {
  return graph_from_json(parse_json(doc), {}, false);
}

SidecarDocument serialize_graph_with_sidecar(const Graph& g, std::string_view sidecar_name) {
  SidecarDocument out;
  out.text = graph_to_json(g, &out.blob, sidecar_name).dump(2) + "\n";
  return out;
}

Graph deserialize_graph(std::string_view doc, std::span<const float> sidecar) {
  return graph_from_json(parse_json(doc), sidecar, true);
}

Graph load_graph(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const json doc = parse_json(text);
  if (doc.is_object() && doc.contains("weights_file")) {
    const auto name = Reader::string(doc.at("weights_file"), "$.weights_file");
    const auto blob = blob_floats(read_file(path.parent_path() / name));
    return graph_from_json(doc, blob, true);
  }
  return graph_from_json(doc, {}, false);
}

void save_graph(const std::filesystem::path& path, const Graph& g, bool sidecar) {
  if (!sidecar) {
    write_file(path, serialize_graph(g));
    return;
  }
  const auto bin = path.stem().string() + ".bin";
  auto doc = serialize_graph_with_sidecar(g, bin);
  write_file(path.parent_path() / bin, blob_bytes(doc.blob));
  write_file(path, doc.text);
}

std::string serialize_mask(const FilterMask& m) {
  json doc = json::object();
  for (const auto& [id, keep] : m.entries()) {
    json arr = json::array();
    for (bool k : keep) arr.push_back(k ? 1 : 0);
    doc[id] = std::move(arr);
  }
  return doc.dump(2) + "\n";
}

FilterMask deserialize_mask(std::string_view text) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError("$", "mask document must be an object");
  FilterMask m;
  for (const auto& [id, arr] : doc.items()) {
    const std::string path = "$." + id;
    if (!arr.is_array()) throw ParseError(path, "expected an array of 0/1");
    std::vector<bool> keep;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& v = arr[i];
      if (v.is_boolean()) {
        keep.push_back(v.get<bool>());
      } else if (v.is_number_integer() && (v.get<int>() == 0 || v.get<int>() == 1)) {
        keep.push_back(v.get<int>() == 1);
      } else {
        throw ParseError(path + "[" + std::to_string(i) + "]", "expected 0 or 1");
      }
    }
    m.set(id, std::move(keep));
  }
  return m;
}

FilterMask load_mask(const std::filesystem::path& path) {
  return deserialize_mask(read_file(path));
}

void save_mask(const std::filesystem::path& path, const FilterMask& m) {
  write_file(path, serialize_mask(m));
}

std::string tensors_to_text(std::span<const Tensor> tensors) {
  std::string out;
  for (const auto& t : tensors) {
    out += std::to_string(t.channels) + " " + std::to_string(t.height) + " " +
           std::to_string(t.width) + "\n";
    std::array<char, 32> buf{};
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      auto res = std::to_chars(buf.data(), buf.data() + buf.size(), t.data[i]);
      out.append(buf.data(), res.ptr);
      out += ((i + 1) % static_cast<std::size_t>(std::max(t.width, 1)) == 0) ? '\n' : ' ';
    }
  }
  return out;
}

std::vector<Tensor> tensors_from_text(std::string_view text) {
  std::vector<Tensor> out;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size()) {
      if (std::isspace(static_cast<unsigned char>(text[pos]))) {
        ++pos;
      } else if (text[pos] == '#') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto token = [&]() -> std::string_view {
    skip();
    const auto start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    return text.substr(start, pos - start);
  };
  auto dim = [&]() {
    auto tok = token();
    int v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size() || v < 0) {
      throw ParseError("byte " + std::to_string(pos), "expected a tensor dimension");
    }
    return v;
  };
  skip();
  while (pos < text.size()) {
    const int c = dim(), h = dim(), w = dim();
    Tensor t(c, h, w);
    for (auto& x : t.data) {
      auto tok = token();
      std::string s(tok);
      char* end = nullptr;
      x = std::strtof(s.c_str(), &end);
      if (s.empty() || end != s.c_str() + s.size()) {
        throw ParseError("byte " + std::to_string(pos), "expected a number, got '" + s + "'");
      }
    }
    out.push_back(std::move(t));
    skip();
  }
  return out;
}

std::string tensors_to_binary(std::span<const Tensor> tensors) {
  std::string out;
  for (const auto& t : tensors) {
    out += kTensorMagic;
    append_u32(out, static_cast<std::uint32_t>(t.channels));
    append_u32(out, static_cast<std::uint32_t>(t.height));
    append_u32(out, static_cast<std::uint32_t>(t.width));
    out += blob_bytes(t.data);
  }
  return out;
}

std::vector<Tensor> tensors_from_binary(std::string_view bytes) {
  std::vector<Tensor> out;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (bytes.substr(pos, 4) != kTensorMagic) {
      throw ParseError("byte " + std::to_string(pos), "missing tensor magic");
    }
    pos += 4;
    const auto c = read_u32(bytes, pos), h = read_u32(bytes, pos), w = read_u32(bytes, pos);
    const std::uint64_t n = std::uint64_t{c} * h * w;
    if (n * 4 > bytes.size() - pos) throw ParseError("byte " + std::to_string(pos), "truncated");
    Tensor t(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
    t.data = blob_floats(bytes.substr(pos, n * 4));
    pos += n * 4;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Tensor> load_tensors(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (std::string_view(bytes).substr(0, 4) == kTensorMagic) return tensors_from_binary(bytes);
  return tensors_from_text(bytes);
}

void save_tensors(const std::filesystem::path& path, std::span<const Tensor> tensors) {
  write_file(path, path.extension() == ".bin" ? tensors_to_binary(tensors)
                                              : tensors_to_text(tensors));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace netshrink
