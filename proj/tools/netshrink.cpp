// Copyright 2026 The netshrink Authors
// SPDX-License-Identifier: Apache-2.0

// netshrink command-line tool.
//
// Exit status: 0 success, 1 invalid graph or mask, deviation above tolerance
// or any other failure, 2 unreadable document, 3 layer collapse.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "netshrink/abstraction.hpp"
#include "netshrink/errors.hpp"
#include "netshrink/fixtures.hpp"
#include "netshrink/interpreter.hpp"
#include "netshrink/maskgen.hpp"
#include "netshrink/serialize.hpp"
#include "netshrink/shrinker.hpp"

namespace fs = std::filesystem;
using namespace netshrink;

namespace {

enum Exit { kOk = 0, kFailure = 1, kParse = 2, kCollapse = 3 };

Graph load_valid_graph(const fs::path& path) {
  Graph g = load_graph(path);
  require_valid(g);
  return g;
}

// ----------------------------------------------------------------------------
// prune

struct PruneArgs {
  std::string model, criterion = "bn-gamma", scope = "global", out_mask;
  double rate = 0.0;
  int iterations = 1;
  bool emit_schedule = false;
};

int run_prune(const PruneArgs& a) {
  if (a.criterion != "bn-gamma") throw Error("unsupported criterion '" + a.criterion + "'");
  const auto scope = a.scope == "local" ? PruningScope::kLocal : PruningScope::kGlobal;
  Graph g = load_valid_graph(a.model);
  const auto scores = score_bn_gamma(g);
  const auto schedule = iteration_schedule(a.rate, a.iterations);
  FilterMask mask;
  for (std::size_t t = 0; t < schedule.size(); ++t) {
    mask = select(g, scores, schedule[t], scope);
    if (a.emit_schedule) {
      std::printf("iteration %zu  rate %.6g  pruned %zu / %zu\n", t + 1, schedule[t],
                  mask.pruned_count(), scores.entries.size());
      if (t + 1 < schedule.size()) {
        fs::path p = a.out_mask;
        p.replace_filename(p.stem().string() + ".iter" + std::to_string(t + 1) +
                           p.extension().string());
        save_mask(p, mask);
      }
    }
  }
  save_mask(a.out_mask, mask);
  return kOk;
}

// ----------------------------------------------------------------------------
// shrink

struct ShrinkArgs {
  std::string model, mask, out, report, structural_mask;
  bool dump_liveness = false;
  bool sidecar = false;
};

int run_shrink(const ShrinkArgs& a) {
  Graph g = load_valid_graph(a.model);
  FilterMask m = load_mask(a.mask);
  ShrinkResult r;
  try {
    r = shrink_pipeline(g, m);
  } catch (const CollapseError& e) {
    std::cerr << "netshrink: " << e.what() << "\n";
    return kCollapse;
  }
  if (a.dump_liveness) std::cout << liveness_table(r.abstraction, r.liveness);
  save_graph(a.out, r.graph, a.sidecar);
  if (!a.report.empty()) write_file(a.report, report_document(r.report));
  if (!a.structural_mask.empty()) {
    write_file(a.structural_mask, structural_mask_document(r.structural_mask, r.index_maps));
  }
  std::printf("params %lld -> %lld (x%.4g), filters %lld/%lld pruned (x%.4g)\n",
              static_cast<long long>(r.report.params_before),
              static_cast<long long>(r.report.params_after), r.report.param_compression,
              static_cast<long long>(r.report.filters_pruned),
              static_cast<long long>(r.report.filters_total), r.report.filter_compression);
  return kOk;
}

// ----------------------------------------------------------------------------
// run / compare

int run_run(const std::string& model, const std::string& input, const std::string& output) {
  Graph g = load_valid_graph(model);
  auto xs = load_tensors(input);
  if (xs.size() != 1) throw Error("input file must hold exactly one tensor");
  save_tensors(output, run_graph(g, xs[0]));
  return kOk;
}

struct CompareArgs {
  std::string model_a, model_b;
  int inputs = 10;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
};

int run_compare(const CompareArgs& a) {
  Graph ga = load_valid_graph(a.model_a);
  Graph gb = load_valid_graph(a.model_b);
  if (!(ga.input == gb.input)) throw Error("models have different input specs");
  std::mt19937_64 rng(a.seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  double worst = 0.0;
  for (int t = 0; t < a.inputs; ++t) {
    Tensor x(ga.input.channels, ga.input.height, ga.input.width);
    for (auto& v : x.data) v = normal(rng);
    const auto ya = run_graph(ga, x);
    const auto yb = run_graph(gb, x);
    if (ya.size() != yb.size()) throw Error("models have different numbers of outputs");
    for (std::size_t k = 0; k < ya.size(); ++k) {
      if (ya[k].channels != yb[k].channels || ya[k].height != yb[k].height ||
          ya[k].width != yb[k].width) {
        throw Error("output " + std::to_string(k + 1) + " has different shapes");
      }
      for (std::size_t i = 0; i < ya[k].data.size(); ++i) {
        const double d = std::abs(static_cast<double>(ya[k].data[i]) - yb[k].data[i]);
        worst = std::isnan(d) ? INFINITY : std::max(worst, d);
      }
    }
  }
  std::printf("max deviation %.9g over %d input(s), tolerance %.9g: %s\n", worst, a.inputs,
              a.tolerance, worst <= a.tolerance ? "ok" : "exceeded");
  return worst <= a.tolerance ? kOk : kFailure;
}

// ----------------------------------------------------------------------------
// analyze

int run_analyze(const std::string& model, const std::string& size) {
  Graph g = load_valid_graph(model);
  int h = g.input.height, w = g.input.width;
  if (!size.empty()) {
    char x = 0;
    std::istringstream is(size);
    if (!(is >> h >> x >> w) || (x != 'x' && x != 'X') || !is.eof()) {
      throw Error("--input-size must look like HxW, got '" + size + "'");
    }
  }
  const auto shapes = infer_shapes(g, h, w);
  std::printf("%-28s %-14s %-14s %10s %12s\n", "node", "kind", "output", "params", "macs");
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& node = g.nodes[i];
    std::int64_t params = 0, macs = 0;
    if (const auto* c = std::get_if<Conv2d>(&node.kind)) {
      params = static_cast<std::int64_t>(c->weights.size()) +
               (c->bias ? static_cast<std::int64_t>(c->bias->size()) : 0);
      macs = static_cast<std::int64_t>(c->weights.size()) * shapes[i].height * shapes[i].width;
    } else if (const auto* bn = std::get_if<BatchNorm2d>(&node.kind)) {
      params = 4 * static_cast<std::int64_t>(bn->channels());
    }
    const auto dims = std::to_string(shapes[i].channels) + "x" + std::to_string(shapes[i].height) +
                      "x" + std::to_string(shapes[i].width);
    std::printf("%-28s %-14s %-14s %10lld %12lld\n", node.id.c_str(),
                std::string(kind_name(node.kind)).c_str(), dims.c_str(),
                static_cast<long long>(params), static_cast<long long>(macs));
  }
  std::printf("total params %lld, MACs %lld at %dx%d\n", static_cast<long long>(count_params(g)),
              static_cast<long long>(count_macs(g, h, w)), h, w);
  return kOk;
}

// ----------------------------------------------------------------------------
// example

int run_example(const std::string& name, std::uint64_t seed, const std::string& out,
                const std::string& mask_out) {
  Graph g;
  std::optional<FilterMask> m;
  if (name == "rb1") {
    g = fixtures::rb1(seed);
    m = fixtures::rb1_mask(g);
  } else if (name == "mini-resnet") {
    g = fixtures::mini_resnet(seed);
  } else if (name == "random") {
    std::mt19937_64 rng(seed);
    g = fixtures::random_residual_graph(rng, {.extras = true});
    m = fixtures::random_mask(g, rng);
  } else {
    throw Error("unknown example '" + name + "' (rb1, mini-resnet, random)");
  }
  save_graph(out, g);
  if (!mask_out.empty()) save_mask(mask_out, m ? *m : FilterMask::all_kept(g));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured-pruning graph shrinker"};
  app.require_subcommand(1);

  PruneArgs prune;
  auto* p = app.add_subcommand("prune", "Generate a filter mask from BatchNorm gammas");
  p->add_option("--model", prune.model, "Graph document")->required()->check(CLI::ExistingFile);
  p->add_option("--criterion", prune.criterion, "Pruning criterion")
      ->check(CLI::IsMember({"bn-gamma"}));
  p->add_option("--scope", prune.scope, "global or local")->check(CLI::IsMember({"global", "local"}));
  p->add_option("--rate", prune.rate, "Target pruning rate in [0, 1)")->required();
  p->add_option("--iterations", prune.iterations, "Linear schedule length")
      ->check(CLI::PositiveNumber);
  p->add_flag("--emit-schedule", prune.emit_schedule, "Print the schedule and write "
                                                      "intermediate masks");
  p->add_option("--out-mask", prune.out_mask, "Mask document to write")->required();

  ShrinkArgs shrink;
  auto* s = app.add_subcommand("shrink", "Rewrite a graph under a filter mask");
  s->add_option("--model", shrink.model)->required()->check(CLI::ExistingFile);
  s->add_option("--mask", shrink.mask)->required()->check(CLI::ExistingFile);
  s->add_option("--out", shrink.out, "Shrunk graph document")->required();
  s->add_option("--report", shrink.report, "Compression report document");
  s->add_option("--emit-structural-mask", shrink.structural_mask,
                "Structural mask and index maps document");
  s->add_flag("--dump-liveness", shrink.dump_liveness, "Print channel liveness");
  s->add_flag("--sidecar", shrink.sidecar, "Store weights in a raw float32 file");

  std::string run_model, run_input, run_output;
  auto* r = app.add_subcommand("run", "Evaluate a graph on one tensor");
  r->add_option("--model", run_model)->required()->check(CLI::ExistingFile);
  r->add_option("--input", run_input, "Tensor file (text, or binary)")->required()
      ->check(CLI::ExistingFile);
  r->add_option("--output", run_output, "Tensor file; .bin writes binary")->required();

  CompareArgs compare;
  auto* c = app.add_subcommand("compare", "Max deviation of two graphs on seeded inputs");
  c->add_option("--model-a", compare.model_a)->required()->check(CLI::ExistingFile);
  c->add_option("--model-b", compare.model_b)->required()->check(CLI::ExistingFile);
  c->add_option("--inputs", compare.inputs)->check(CLI::PositiveNumber);
  c->add_option("--seed", compare.seed);
  c->add_option("--tolerance", compare.tolerance)->check(CLI::NonNegativeNumber);

  std::string analyze_model, analyze_size;
  auto* an = app.add_subcommand("analyze", "Parameter and MAC table");
  an->add_option("--model", analyze_model)->required()->check(CLI::ExistingFile);
  an->add_option("--input-size", analyze_size, "HxW");

  std::string example_name = "rb1", example_out, example_mask;
  std::uint64_t example_seed = 1;
  auto* ex = app.add_subcommand("example", "Write a built-in fixture graph");
  ex->add_option("--name", example_name, "rb1, mini-resnet or random");
  ex->add_option("--seed", example_seed);
  ex->add_option("--out", example_out)->required();
  ex->add_option("--mask-out", example_mask, "Also write a mask");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*p) return run_prune(prune);
    if (*s) return run_shrink(shrink);
    if (*r) return run_run(run_model, run_input, run_output);
    if (*c) return run_compare(compare);
    if (*an) return run_analyze(analyze_model, analyze_size);
    if (*ex) return run_example(example_name, example_seed, example_out, example_mask);
  } catch (const ParseError& e) {
    std::cerr << "netshrink: parse error: " << e.what() << "\n";
    return kParse;
  } catch (const CollapseError& e) {
    std::cerr << "netshrink: " << e.what() << "\n";
    return kCollapse;
  } catch (const std::exception& e) {
    std::cerr << "netshrink: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
