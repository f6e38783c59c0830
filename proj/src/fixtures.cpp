// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

#include "netshrink/fixtures.hpp"

#include <cmath>
#include <map>
#include <string>

namespace netshrink::fixtures {

namespace {

class Builder {
 public:
  Builder(std::mt19937_64& rng, int channels, int height, int width) : rng_(rng) {
    g_.input = {channels, height, width};
    g_.nodes.push_back(Node{"input", Input{}, {}});
    channels_["input"] = channels;
  }

  std::string conv(const std::string& id, const std::string& in, int out, int k,
                   int stride = 1, bool bias = false) {
    Conv2d c;
    c.out_channels = out;
    c.in_channels = channels_.at(in);
    c.kernel_h = c.kernel_w = k;
    c.stride = stride;
    const double scale = 1.0 / std::sqrt(static_cast<double>(c.in_channels * k * k));
    std::normal_distribution<double> w(0.0, scale);
    c.weights.resize(static_cast<std::size_t>(out) * c.in_channels * k * k);
    for (auto& v : c.weights) v = static_cast<float>(w(rng_));
    if (bias) {
      std::normal_distribution<double> b(0.0, 0.1);
      c.bias.emplace(out);
      for (auto& v : *c.bias) v = static_cast<float>(b(rng_));
    }
    return add_node(id, std::move(c), {in}, out);
  }

  std::string bn(const std::string& id, const std::string& in, bool half_normal_gamma) {
    const int n = channels_.at(in);
    BatchNorm2d b;
    std::normal_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> mag(0.5, 1.5);
    std::normal_distribution<double> small(0.0, 0.1);
    std::bernoulli_distribution flip(0.25);
    for (int c = 0; c < n; ++c) {
      double gamma = half_normal_gamma ? std::abs(unit(rng_)) : mag(rng_);
      if (!half_normal_gamma && flip(rng_)) gamma = -gamma;
      b.gamma.push_back(static_cast<float>(gamma));
      b.beta.push_back(static_cast<float>(small(rng_)));
      b.running_mean.push_back(static_cast<float>(small(rng_)));
      b.running_var.push_back(static_cast<float>(mag(rng_)));
    }
    return add_node(id, std::move(b), {in}, n);
  }

  std::string relu(const std::string& id, const std::string& in) {
    return add_node(id, Relu{}, {in}, channels_.at(in));
  }
  std::string add(const std::string& id, const std::string& a, const std::string& b) {
    return add_node(id, Add{}, {a, b}, channels_.at(a));
  }
  std::string concat(const std::string& id, const std::string& a, const std::string& b) {
    return add_node(id, Concat{}, {a, b}, channels_.at(a) + channels_.at(b));
  }
  std::string upsample(const std::string& id, const std::string& in, int factor) {
    return add_node(id, Upsample{factor}, {in}, channels_.at(in));
  }
  std::string pool(const std::string& id, const std::string& in) {
    return add_node(id, GlobalAvgPool{}, {in}, channels_.at(in));
  }
  void output(const std::string& id, const std::string& in) {
    add_node(id, Output{}, {in}, channels_.at(in));
    g_.outputs.push_back(id);
  }

  int channels(const std::string& id) const { return channels_.at(id); }
  Graph take() { return std::move(g_); }

 private:
  std::string add_node(const std::string& id, NodeKind kind, std::vector<std::string> inputs,
                       int channels) {
    g_.nodes.push_back(Node{id, std::move(kind), std::move(inputs)});
    channels_[id] = channels;
    return id;
  }

  std::mt19937_64& rng_;
  Graph g_;
  std::map<std::string, int> channels_;
};

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

Graph rb1(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Builder b(rng, 2, 5, 5);
  b.conv("conv1", "input", 3, 3, 1, true);
  b.relu("relu1", "conv1");
  b.conv("conv2", "relu1", 3, 3, 1, true);
  b.relu("relu2", "conv2");
  b.conv("conv3", "relu2", 3, 3, 1, true);
  b.add("add", "conv3", "conv1");
  b.conv("conv4", "add", 2, 3, 1, true);
  b.output("output", "conv4");
  return b.take();
}

FilterMask rb1_mask(const Graph& rb1_graph) {
  auto m = FilterMask::all_kept(rb1_graph);
  m.set("conv1", {true, true, false});
  m.set("conv3", {true, false, true});
  return m;
}

Graph mini_resnet(std::uint64_t seed, const MiniResNetOptions& options) {
  std::mt19937_64 rng(seed);
  Builder b(rng, options.input_channels, options.input_size, options.input_size);
  auto x = b.conv("stem.conv", "input", options.widths.at(0), 3);
  x = b.bn("stem.bn", x, true);
  x = b.relu("stem.relu", x);
  for (std::size_t s = 0; s < options.widths.size(); ++s) {
    const int width = options.widths[s];
    for (int k = 0; k < options.blocks_per_stage; ++k) {
      const std::string p = "stage" + std::to_string(s + 1) + ".block" + std::to_string(k + 1);
      const int stride = (s > 0 && k == 0) ? 2 : 1;
      auto y = b.conv(p + ".conv1", x, width, 3, stride);
      y = b.bn(p + ".bn1", y, true);
      y = b.relu(p + ".relu1", y);
      y = b.conv(p + ".conv2", y, width, 3);
      y = b.bn(p + ".bn2", y, true);
      auto skip = x;
      if (stride != 1 || b.channels(x) != width) {
        skip = b.conv(p + ".proj", x, width, 1, stride);
        skip = b.bn(p + ".proj_bn", skip, true);
      }
      x = b.add(p + ".add", y, skip);
      x = b.relu(p + ".relu2", x);
    }
  }
  x = b.pool("pool", x);
  x = b.conv("fc", x, options.classes, 1, 1, true);
  b.output("output", x);
  return b.take();
}

Graph random_residual_graph(std::mt19937_64& rng, const RandomGraphOptions& options) {
  auto channels = [&] { return uniform_int(rng, options.min_channels, options.max_channels); };
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution rare(0.3);

  Builder b(rng, channels(), options.spatial, options.spatial);
  int spatial = options.spatial;
  auto x = b.conv("stem.conv", "input", channels(), 3, 1, coin(rng));
  x = b.bn("stem.bn", x, false);
  x = b.relu("stem.relu", x);

  std::string full_res = x;
  bool downsampled = false;
  const int blocks = uniform_int(rng, options.min_blocks, options.max_blocks);
  for (int k = 0; k < blocks; ++k) {
    const std::string p = "block" + std::to_string(k + 1);
    const int width = coin(rng) ? b.channels(x) : channels();
    const int stride = (!downsampled && spatial >= 4 && rare(rng)) ? 2 : 1;
    auto y = b.conv(p + ".conv1", x, width, 3, stride, coin(rng));
    y = b.bn(p + ".bn1", y, false);
    y = b.relu(p + ".relu1", y);
    y = b.conv(p + ".conv2", y, width, 3, 1, coin(rng));
    y = b.bn(p + ".bn2", y, false);
    auto skip = x;
    if (stride != 1 || b.channels(x) != width) {
      skip = b.conv(p + ".proj", x, width, 1, stride, coin(rng));
      skip = b.bn(p + ".proj_bn", skip, false);
    }
    x = b.add(p + ".add", y, skip);
    x = b.relu(p + ".relu2", x);

    if (stride == 2) {
      downsampled = true;
      spatial = (spatial + 1) / 2;
      if (options.extras && options.spatial % 2 == 0 && coin(rng)) {
        // Fuse back into the full-resolution stream.
        auto u = b.conv(p + ".fuse", x, b.channels(full_res), 1, 1, coin(rng));
        u = b.bn(p + ".fuse_bn", u, false);
        u = b.upsample(p + ".up", u, 2);
        x = b.add(p + ".fuse_add", u, full_res);
        spatial = options.spatial;
        downsampled = false;
      }
    }
    if (spatial == options.spatial) full_res = x;
    if (options.extras && rare(rng)) {
      auto side = b.conv(p + ".side", x, channels(), 1, 1, coin(rng));
      side = b.bn(p + ".side_bn", side, false);
      x = b.concat(p + ".cat", x, side);
    }
  }

  if (options.extras && rare(rng)) {
    auto h = b.pool("aux.pool", x);
    h = b.conv("aux.head", h, uniform_int(rng, 1, 4), 1, 1, true);
    b.output("aux.output", h);
  }
  auto head = b.conv("head", x, uniform_int(rng, 1, 4), 1, 1, coin(rng));
  b.output("output", head);
  return b.take();
}

FilterMask random_mask(const Graph& g, std::mt19937_64& rng, const RandomMaskOptions& options) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FilterMask m;
  for (const auto& node : g.nodes) {
    const auto* conv = std::get_if<Conv2d>(&node.kind);
    if (!conv) continue;
    std::vector<bool> keep(conv->out_channels, true);
    const double mode = u(rng);
    if (mode < options.full_prune_probability) {
      keep.assign(keep.size(), false);
    } else if (mode >= options.full_prune_probability + options.keep_all_probability) {
      for (std::size_t f = 0; f < keep.size(); ++f) keep[f] = u(rng) >= options.prune_probability;
    }
    m.set(node.id, std::move(keep));
  }
  return m;
}

}  // namespace netshrink::fixtures
