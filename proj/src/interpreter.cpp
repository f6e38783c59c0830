// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include "netshrink/interpreter.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "netshrink/errors.hpp"

namespace netshrink {

namespace {

struct Window {
  int out = 0;
  int pad_begin = 0;
};

Window conv_window(int in, int kernel, int stride, Padding padding) {
  auto out = conv_output_size(in, kernel, stride, padding);
  if (!out) {
    throw ShapeError("convolution cannot produce an integral output from size " +
                     std::to_string(in));
  }
  Window w{*out, 0};
  if (padding == Padding::kSame) {
    const int total = std::max((*out - 1) * stride + kernel - in, 0);
    w.pad_begin = total / 2;
  }
  return w;
}

void require_same_spatial(const Tensor& a, const Tensor& b, const char* op) {
  if (a.height != b.height || a.width != b.width) {
    throw ShapeError(std::string(op) + ": spatial sizes differ (" +
                     std::to_string(a.height) + "x" + std::to_string(a.width) + " vs " +
                     std::to_string(b.height) + "x" + std::to_string(b.width) + ")");
  }
}

}  // namespace

Tensor op_conv2d(const Tensor& x, const Conv2d& conv) {
  if (x.channels != conv.in_channels) {
    throw ShapeError("Conv2d: expects " + std::to_string(conv.in_channels) +
                     " input channels, got " + std::to_string(x.channels));
  }
  const auto wy = conv_window(x.height, conv.kernel_h, conv.stride, conv.padding);
  const auto wx = conv_window(x.width, conv.kernel_w, conv.stride, conv.padding);
  Tensor y(conv.out_channels, wy.out, wx.out);
  for (int o = 0; o < conv.out_channels; ++o) {
    const float b = conv.bias ? (*conv.bias)[o] : 0.0f;
    for (int oy = 0; oy < wy.out; ++oy) {
      for (int ox = 0; ox < wx.out; ++ox) {
        float acc = 0.0f;
        for (int i = 0; i < conv.in_channels; ++i) {
          for (int kh = 0; kh < conv.kernel_h; ++kh) {
            const int iy = oy * conv.stride + kh - wy.pad_begin;
            if (iy < 0 || iy >= x.height) continue;
            for (int kw = 0; kw < conv.kernel_w; ++kw) {
              const int ix = ox * conv.stride + kw - wx.pad_begin;
              if (ix < 0 || ix >= x.width) continue;
              acc += conv.weight(o, i, kh, kw) * x.at(i, iy, ix);
            }
          }
        }
        y.at(o, oy, ox) = acc + b;
      }
    }
  }
  return y;
}

Tensor op_batchnorm(const Tensor& x, const BatchNorm2d& bn) {
  if (x.channels != bn.channels()) {
    throw ShapeError("BatchNorm2d: expects " + std::to_string(bn.channels()) +
                     " channels, got " + std::to_string(x.channels));
  }
  Tensor y(x.channels, x.height, x.width);
  for (int c = 0; c < x.channels; ++c) {
    const float scale = bn.gamma[c] / std::sqrt(bn.running_var[c] + bn.eps);
    const float mean = bn.running_mean[c];
    const float shift = bn.beta[c];
    const auto base = static_cast<std::size_t>(c) * x.plane();
    for (std::size_t p = 0; p < x.plane(); ++p) {
      y.data[base + p] = (x.data[base + p] - mean) * scale + shift;
    }
  }
  return y;
}

Tensor op_relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data) v = std::max(v, 0.0f);
  return y;
}

Tensor op_add(const Tensor& a, const Tensor& b) {
  if (a.channels != b.channels) {
    throw ShapeError("Add: channel counts differ (" + std::to_string(a.channels) + " vs " +
                     std::to_string(b.channels) + ")");
  }
  require_same_spatial(a, b, "Add");
  Tensor y(a.channels, a.height, a.width);
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] = a.data[i] + b.data[i];
  return y;
}

Tensor op_index_add(const Tensor& a, const Tensor& b, const IndexMap& map) {
  if (auto problems = check_index_map(map); !problems.empty()) {
    throw ShapeError("IndexAdd: invalid index map: " + problems.front());
  }
  if (a.channels != map.a_channels || b.channels != map.b_channels) {
    throw ShapeError("IndexAdd: operands have " + std::to_string(a.channels) + " and " +
                     std::to_string(b.channels) + " channels, map expects " +
                     std::to_string(map.a_channels) + " and " +
                     std::to_string(map.b_channels));
  }
  int h = a.height, w = a.width;
  if (a.channels == 0) {
    h = b.height;
    w = b.width;
  } else if (b.channels != 0) {
    require_same_spatial(a, b, "IndexAdd");
  }
  Tensor y(map.out_channels(), h, w);
  const std::size_t plane = y.plane();
  for (int k = 0; k < map.out_channels(); ++k) {
    const int ia = map.a_index[k];
    const int ib = map.b_index[k];
    float* out = y.data.data() + static_cast<std::size_t>(k) * plane;
    const float* pa = ia ? a.data.data() + static_cast<std::size_t>(ia - 1) * plane : nullptr;
    const float* pb = ib ? b.data.data() + static_cast<std::size_t>(ib - 1) * plane : nullptr;
    for (std::size_t p = 0; p < plane; ++p) {
      if (pa && pb) {
        out[p] = pa[p] + pb[p];
      } else {
        out[p] = pa ? pa[p] : pb[p];
      }
    }
  }
  return y;
}

Tensor op_concat(std::span<const Tensor* const> inputs) {
  if (inputs.empty()) throw ShapeError("Concat: no inputs");
  int channels = 0;
  for (const auto* t : inputs) {
    require_same_spatial(*inputs[0], *t, "Concat");
    channels += t->channels;
  }
  Tensor y(channels, inputs[0]->height, inputs[0]->width);
  auto it = y.data.begin();
  for (const auto* t : inputs) it = std::copy(t->data.begin(), t->data.end(), it);
  return y;
}

Tensor op_upsample(const Tensor& x, int factor) {
  if (factor < 1) throw ShapeError("Upsample: factor must be >= 1");
  Tensor y(x.channels, x.height * factor, x.width * factor);
  for (int c = 0; c < y.channels; ++c) {
    for (int oy = 0; oy < y.height; ++oy) {
      for (int ox = 0; ox < y.width; ++ox) {
        y.at(c, oy, ox) = x.at(c, oy / factor, ox / factor);
      }
    }
  }
  return y;
}

Tensor op_global_avg_pool(const Tensor& x) {
  Tensor y(x.channels, 1, 1);
  const auto plane = x.plane();
  for (int c = 0; c < x.channels; ++c) {
    float acc = 0.0f;
    const auto base = static_cast<std::size_t>(c) * plane;
    for (std::size_t p = 0; p < plane; ++p) acc += x.data[base + p];
    y.data[c] = acc / static_cast<float>(plane);
  }
  return y;
}

std::vector<Tensor> run_graph(const Graph& g, const Tensor& x) {
  if (x.channels != g.input.channels) {
    throw ShapeError("input tensor has " + std::to_string(x.channels) +
                     " channels, graph expects " + std::to_string(g.input.channels));
  }
  if (x.data.size() != static_cast<std::size_t>(x.channels) * x.plane()) {
    throw ShapeError("input tensor data length does not match its dims");
  }
  std::unordered_map<std::string, Tensor> values;
  for (const auto& id : topo_order(g)) {
    const Node& node = g.node(id);
    std::vector<const Tensor*> in;
    for (const auto& src : node.inputs) in.push_back(&values.at(src));
    try {
      Tensor y = std::visit(
          [&](const auto& k) -> Tensor {
            using T = std::decay_t<decltype(k)>;
            auto need = [&](std::size_t n) {
              if (in.size() != n) {
                throw ShapeError("expects " + std::to_string(n) + " input(s)");
              }
            };
            if constexpr (std::is_same_v<T, Input>) {
              return x;
            } else if constexpr (std::is_same_v<T, Conv2d>) {
              need(1);
              return op_conv2d(*in[0], k);
            } else if constexpr (std::is_same_v<T, BatchNorm2d>) {
              need(1);
              return op_batchnorm(*in[0], k);
            } else if constexpr (std::is_same_v<T, Relu>) {
              need(1);
              return op_relu(*in[0]);
            } else if constexpr (std::is_same_v<T, Add>) {
              need(2);
              return op_add(*in[0], *in[1]);
            } else if constexpr (std::is_same_v<T, IndexAdd>) {
              need(2);
              return op_index_add(*in[0], *in[1], k.index_map);
            } else if constexpr (std::is_same_v<T, Concat>) {
              return op_concat(in);
            } else if constexpr (std::is_same_v<T, Upsample>) {
              need(1);
              return op_upsample(*in[0], k.factor);
            } else if constexpr (std::is_same_v<T, GlobalAvgPool>) {
              need(1);
              return op_global_avg_pool(*in[0]);
            } else {
              need(1);
              return *in[0];
            }
          },
          node.kind);
      values.emplace(id, std::move(y));
    } catch (const ShapeError& e) {
      throw ShapeError("node '" + id + "': " + e.what());
    }
  }
  std::vector<Tensor> out;
  for (const auto& id : g.outputs) out.push_back(values.at(id));
  return out;
}

Graph apply_hard_mask(const Graph& g, const FilterMask& m) {
  check_mask(g, m);
  // Channels that still carry a signal from the input through kept filters.
  std::unordered_map<std::string, std::vector<bool>> live;
  Graph out = g;
  for (const auto& id : topo_order(g)) {
    Node& node = out.nodes[*out.find(id)];
    std::vector<const std::vector<bool>*> in;
    for (const auto& src : node.inputs) in.push_back(&live.at(src));
    std::vector<bool> here;
    if (node.is<Input>()) {
      here.assign(g.input.channels, true);
    } else if (auto* conv = std::get_if<Conv2d>(&node.kind)) {
      const auto& keep = m.at(id);
      const bool any_input = std::find(in[0]->begin(), in[0]->end(), true) != in[0]->end();
      here.assign(conv->out_channels, false);
      for (int o = 0; o < conv->out_channels; ++o) {
        here[o] = keep[o] && any_input;
        if (here[o]) continue;
        const auto row = static_cast<std::size_t>(conv->in_channels) * conv->kernel_h *
                         conv->kernel_w;
        std::fill_n(conv->weights.begin() + static_cast<std::ptrdiff_t>(o * row), row, 0.0f);
        if (conv->bias) (*conv->bias)[o] = 0.0f;
      }
    } else if (auto* bn = std::get_if<BatchNorm2d>(&node.kind)) {
      here = *in[0];
      for (int c = 0; c < bn->channels(); ++c) {
        if (!here[c]) {
          bn->gamma[c] = 0.0f;
          bn->beta[c] = 0.0f;
        }
      }
    } else if (node.is<Add>()) {
      here = *in[0];
      for (std::size_t c = 0; c < here.size(); ++c) here[c] = here[c] || (*in[1])[c];
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
    live.emplace(id, std::move(here));
  }
  return out;
}

}  // namespace netshrink
