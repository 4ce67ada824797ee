#include "l1prune/generate.hpp"

#include <algorithm>
#include <cmath>

#include "l1prune/npy.hpp"

namespace l1prune {

Topology parse_topology(std::string_view text) {
  if (text == "chain") return Topology::chain;
  if (text == "decoder") return Topology::decoder;
  throw ParameterError("unknown topology '" + std::string(text) + "'");
}

MatrixD gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  std::normal_distribution<double> dist(0.0, scale);
  MatrixD out(rows, cols);
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = dist(rng);
  return out;
}

namespace {

struct Layer {
  std::string id;
  std::string input;
  Eigen::Index rows;
  Eigen::Index cols;
};

std::vector<Layer> layout(const ProblemSpec& spec) {
  std::vector<Layer> layers;
  const std::string in{kUnitInput};
  if (spec.topology == Topology::decoder) {
    layers = {{"k", in, spec.m, spec.n},     {"q", in, spec.m, spec.n},
              {"v", in, spec.m, spec.n},     {"o", "v", spec.n, spec.m},
              {"fc1", "o", spec.m, spec.n},  {"fc2", "fc1", spec.n, spec.m}};
    return layers;
  }
  for (std::size_t i = 0; i < spec.nodes_per_unit; ++i) {
    layers.push_back({"fc" + std::to_string(i + 1), i == 0 ? in : layers.back().id, spec.m,
                      i == 0 ? spec.n : spec.m});
  }
  return layers;
}

Activation activation_for(const ProblemSpec& spec, std::size_t index, bool is_sink) {
  if (is_sink || spec.activations == "none") return Activation::none;
  if (spec.activations == "relu") return Activation::relu;
  if (spec.activations == "alternate") {
    return index % 2 == 0 ? Activation::relu : Activation::none;
  }
  throw ParameterError("unknown activation mix '" + spec.activations + "'");
}

}  // namespace

std::vector<GeneratedUnit> generate_units(std::uint64_t seed, const ProblemSpec& spec) {
  if (spec.units == 0 || spec.m <= 0 || spec.n <= 0 || spec.p <= 0 ||
      (spec.topology == Topology::chain && spec.nodes_per_unit == 0)) {
    throw ParameterError("generate: counts and dimensions must be positive");
  }
  validate(spec.pattern);
  std::mt19937_64 rng(seed);
  // Held-out activations come from an independent stream.
  std::mt19937_64 heldout_rng(seed ^ 0x9E3779B97F4A7C15ULL);
  const auto layers = layout(spec);

  std::vector<GeneratedUnit> out;
  for (std::size_t u = 0; u < spec.units; ++u) {
    GeneratedUnit g;
    g.unit.name = "unit" + std::to_string(u);
    g.unit.input_dim = spec.n;
    PruneUnit probe;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      probe.nodes.push_back({l.id, MatrixD(), l.input, Activation::none});
    }
    const auto sinks = sink_ids(probe);
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      const bool is_sink = std::find(sinks.begin(), sinks.end(), l.id) != sinks.end();
      g.unit.nodes.push_back(OperatorNode{l.id,
                                          gaussian(rng, l.rows, l.cols,
                                                   1.0 / std::sqrt(static_cast<double>(l.cols))),
                                          l.input, activation_for(spec, i, is_sink)});
    }
    // Correlated features: x = (I + 0.5 G / sqrt(n)) z.
    const MatrixD mixing = MatrixD::Identity(spec.n, spec.n) +
                           gaussian(rng, spec.n, spec.n, 0.5 / std::sqrt(double(spec.n)));
    g.calibration = mixing * gaussian(rng, spec.n, spec.p);
    g.heldout = mixing * gaussian(heldout_rng, spec.n, spec.p);
    validate(g.unit);
    for (const auto& node : g.unit.nodes) detail::check_applicable(spec.pattern, node.weight.cols());
    out.push_back(std::move(g));
  }
  return out;
}

Manifest generate_problem(std::uint64_t seed, const ProblemSpec& spec,
                          const std::filesystem::path& dir) {
  const auto units = generate_units(seed, spec);
  std::filesystem::create_directories(dir);
  Manifest manifest;
  manifest.base_dir = dir;
  manifest.seed = seed;
  manifest.pattern = spec.pattern;
  manifest.warm_start = spec.warm_start;
  manifest.tuner = spec.tuner;
  for (const auto& g : units) {
    UnitSpec us;
    us.name = g.unit.name;
    us.calibration = us.name + ".calib.npy";
    us.heldout = us.name + ".heldout.npy";
    save_array(dir / us.calibration, g.calibration);
    save_array(dir / us.heldout, g.heldout);
    for (const auto& node : g.unit.nodes) {
      NodeSpec ns{node.id, us.name + "." + node.id + ".npy", node.input, node.activation};
      save_array(dir / ns.weight, node.weight);
      us.nodes.push_back(std::move(ns));
    }
    manifest.units.push_back(std::move(us));
  }
  write_manifest(dir / "manifest.json", manifest);
  return manifest;
}

}  // namespace l1prune
