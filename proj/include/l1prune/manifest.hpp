#pragma once

// JSON manifest describing pruning units stored as NPY files.
//
//   {
//     "version": "l1prune.manifest/1",
//     "seed": 7,
//     "pattern": "unstructured:0.5",
//     "warm_start": "wanda",
//     "tuner": {"lambda0": 1e-5, "lambda_lo": 0, "lambda_hi": 1e6, "xi": 0.3,
//               "K": 20, "T": 3, "epsilon": 1e-6, "stop_tol": 1e-6, "deterministic": true},
//     "units": [
//       {"name": "unit0", "calibration": "unit0.calib.npy", "heldout": "unit0.heldout.npy",
//        "nodes": [{"id": "fc1", "weight": "unit0.fc1.npy", "input": "@input",
//                   "activation": "relu"}, ...]}
//     ]
//   }
//
// Paths are relative to the manifest's directory. "heldout" is optional.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "l1prune/sparsity.hpp"
#include "l1prune/tuner.hpp"
#include "l1prune/unitgraph.hpp"

namespace l1prune {

inline constexpr const char* kManifestVersion = "l1prune.manifest/1";
inline constexpr const char* kReportVersion = "l1prune.report/1";
inline constexpr const char* kEvalVersion = "l1prune.eval/1";
inline constexpr const char* kSweepVersion = "l1prune.sweep/1";

struct NodeSpec {
  std::string id;
  std::string weight;
  std::string input{kUnitInput};
  Activation activation = Activation::none;
};

struct UnitSpec {
  std::string name;
  std::string calibration;
  std::string heldout;
  std::vector<NodeSpec> nodes;
};

struct Manifest {
  std::string version = kManifestVersion;
  std::filesystem::path base_dir;
  std::uint64_t seed = 0;
  SparsityPattern pattern = Unstructured{0.5};
  WarmStartKind warm_start = WarmStartKind::wanda;
  TunerConfig tuner;
  std::vector<UnitSpec> units;
};

struct LoadedUnit {
  PruneUnit unit;
  MatrixD calibration;
  std::optional<MatrixD> heldout;
};

nlohmann::json tuner_to_json(const TunerConfig& cfg);
/// Overlays the keys present in `j` onto `cfg`.
TunerConfig tuner_from_json(const nlohmann::json& j, TunerConfig cfg = {});

nlohmann::json to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Reads and structurally validates a manifest (schema, unique unit names).
/// File contents are checked by validate_files.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Loads one unit's arrays and checks wiring and shapes against them.
LoadedUnit load_unit(const Manifest& manifest, const UnitSpec& spec);

/// Loads every unit once; throws on the first missing file or shape mismatch.
void validate_files(const Manifest& manifest);

/// Where the pruned copy of `weight` goes: "<stem>.pruned.npy" next to the
/// original, or inside `out_dir` when it is non-empty.
std::filesystem::path pruned_path_for(const Manifest& manifest, const std::string& weight,
                                      const std::filesystem::path& out_dir);

}  // namespace l1prune
