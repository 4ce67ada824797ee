#pragma once

// Manifest-level drivers: prune every unit on a bounded worker pool, evaluate
// pruned units on held-out activations, and sweep sparsity rates.

#include <cstddef>
#include <filesystem>
#include <vector>

#include "json.hpp"

#include "l1prune/manifest.hpp"

namespace l1prune {

struct RunOptions {
  std::size_t parallelism = 1;
  bool corrected = true;
  // Empty: write "<stem>.pruned.npy" next to each original weight.
  std::filesystem::path out_dir;
  // Empty: no report file; the report is still returned.
  std::filesystem::path report_path;
};

struct RunOutcome {
  nlohmann::json report;
  bool ok = true;
};

/// Prunes all units of `manifest`. Files of a unit are written only after
/// every node of that unit succeeded. Unit records appear in manifest order
/// regardless of completion order.
RunOutcome run_prune(const Manifest& manifest, const RunOptions& options);

/// Output error of each pruned unit against its dense counterpart on the
/// held-out activations (calibration when none are listed). A unit whose
/// pruned files are missing gets an error entry instead.
nlohmann::json eval_error(const Manifest& manifest, const std::filesystem::path& pruned_dir);

struct SweepOptions {
  std::vector<double> rates{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  RunOptions run;
  std::filesystem::path out_dir;
};

/// One run_prune + eval_error per unstructured rate, each into
/// out_dir/rate_<r>/. Returns the sweep summary (also written to
/// out_dir/sweep.json).
nlohmann::json run_sweep(const Manifest& manifest, const SweepOptions& options);

/// Copy of a report with every timing field removed.
nlohmann::json strip_timing(nlohmann::json report);

}  // namespace l1prune
