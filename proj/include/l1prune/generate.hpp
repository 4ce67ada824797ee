#pragma once

// Synthetic pruning problems: Gaussian weights and correlated Gaussian
// calibration activations, written as NPY files plus a manifest.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "l1prune/manifest.hpp"

namespace l1prune {

enum class Topology {
  chain,    // node_0 reads the unit input, node_i reads node_{i-1}
  decoder,  // k, q, v read the input; o <- v; fc1 <- o; fc2 <- fc1
};

Topology parse_topology(std::string_view text);

struct ProblemSpec {
  std::size_t units = 1;
  std::size_t nodes_per_unit = 3;  // chain only; decoder always has six
  Eigen::Index m = 16;             // operator output width
  Eigen::Index n = 16;             // unit input width
  Eigen::Index p = 128;            // calibration columns
  Topology topology = Topology::chain;
  // "none", "relu" (every non-sink node) or "alternate" (every other non-sink node).
  std::string activations = "relu";
  SparsityPattern pattern = Unstructured{0.5};
  WarmStartKind warm_start = WarmStartKind::wanda;
  TunerConfig tuner;
};

/// Gaussian matrix with entries N(0, scale^2) drawn row-major from `rng`.
MatrixD gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0);

/// Builds the units of `spec` in memory (weights and calibration input).
/// Deterministic in `seed`.
struct GeneratedUnit {
  PruneUnit unit;
  MatrixD calibration;
  MatrixD heldout;
};
std::vector<GeneratedUnit> generate_units(std::uint64_t seed, const ProblemSpec& spec);

/// Writes the generated problem into `dir` (created if missing) and returns
/// the manifest, which is also saved as dir/manifest.json.
Manifest generate_problem(std::uint64_t seed, const ProblemSpec& spec,
                          const std::filesystem::path& dir);

}  // namespace l1prune
