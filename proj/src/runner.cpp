#include "l1prune/runner.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <thread>

#include "l1prune/npy.hpp"

namespace l1prune {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json trial_to_json(const LambdaTrial& t) {
  return json{{"lambda", t.lambda},
              {"e_total", t.e_total},
              {"e_round", t.e_round},
              {"accepted", t.accepted},
              {"fista_iterations", t.fista_iterations}};
}

json prune_one_unit(const Manifest& manifest, const UnitSpec& spec, const RunOptions& options) {
  const auto start = Clock::now();
  json record{{"name", spec.name}};
  try {
    const auto loaded = load_unit(manifest, spec);
    const auto result =
        options.corrected
            ? prune_unit(loaded.unit, loaded.calibration, manifest.pattern, manifest.warm_start,
                         manifest.tuner)
            : prune_unit_uncorrected(loaded.unit, loaded.calibration, manifest.pattern,
                                     manifest.warm_start, manifest.tuner);

    json nodes = json::array();
    for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
      const auto& node_spec = spec.nodes[i];
      const auto& rec = result.nodes[i];
      const auto& r = rec.result;
      json trace = json::array();
      for (const auto& t : r.lambda_trace) trace.push_back(trial_to_json(t));
      nodes.push_back(
          {{"id", rec.id},
           {"weight", node_spec.weight},
           {"pruned", pruned_path_for(manifest, node_spec.weight, options.out_dir)
                          .filename()
                          .string()},
           {"e_best", r.best_total_error},
           {"e_initial", r.initial_total_error},
           {"sparsity", sparsity_of(r.weights)},
           {"outer_iterations", r.outer_iterations},
           {"inner_iterations", r.inner_iterations},
           {"stop_reason", to_string(r.stop_reason)},
           {"lambda_trace", std::move(trace)},
           {"warnings", r.warnings},
           {"wall_time_s", rec.wall_time_s}});
    }
    // All nodes succeeded; only now touch the filesystem.
    for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
      save_array(pruned_path_for(manifest, spec.nodes[i].weight, options.out_dir),
                 result.nodes[i].result.weights);
    }
    record["status"] = "ok";
    record["unit_output_error"] = result.unit_output_error;
    record["nodes"] = std::move(nodes);
  } catch (const NodeError& err) {
    record["status"] = "failed";
    record["failed_node"] = err.node_id();
    record["error"] = err.what();
  } catch (const std::exception& err) {
    record["status"] = "failed";
    record["error"] = err.what();
  }
  record["wall_time_s"] = seconds_since(start);
  return record;
}

std::string rate_label(double rate) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), rate);
  return "rate_" + std::string(buf, res.ptr);
}

void write_json(const std::filesystem::path& path, const json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

}  // namespace

RunOutcome run_prune(const Manifest& manifest, const RunOptions& options) {
  const auto start = Clock::now();
  validate_files(manifest);
  if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);

  const std::size_t count = manifest.units.size();
  std::vector<json> records(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      records[i] = prune_one_unit(manifest, manifest.units[i], options);
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.parallelism, count));
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();

  RunOutcome outcome;
  json units = json::array();
  for (auto& r : records) {
    outcome.ok = outcome.ok && r.at("status") == "ok";
    units.push_back(std::move(r));
  }
  outcome.report = json{{"version", kReportVersion},
                        {"seed", manifest.seed},
                        {"pattern", to_string(manifest.pattern)},
                        {"warm_start", to_string(manifest.warm_start)},
                        {"corrected", options.corrected},
                        {"tuner", tuner_to_json(manifest.tuner)},
                        {"status", outcome.ok ? "ok" : "failed"},
                        {"units", std::move(units)},
                        {"total_time_s", seconds_since(start)}};
  if (!options.report_path.empty()) write_json(options.report_path, outcome.report);
  return outcome;
}

json eval_error(const Manifest& manifest, const std::filesystem::path& pruned_dir) {
  json units = json::array();
  bool ok = true;
  for (const auto& spec : manifest.units) {
    json record{{"name", spec.name}};
    try {
      const auto loaded = load_unit(manifest, spec);
      PruneUnit pruned = loaded.unit;
      for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
        const auto path = pruned_path_for(manifest, spec.nodes[i].weight, pruned_dir);
        if (!std::filesystem::exists(path)) {
          throw Error("missing pruned weight '" + path.string() + "'");
        }
        pruned.nodes[i].weight = load_array(path);
      }
      const MatrixD& x = loaded.heldout ? *loaded.heldout : loaded.calibration;
      const double err = unit_output_error(loaded.unit, pruned, x);
      double dense_norm = 0;
      const auto outputs = dense_forward(loaded.unit, x);
      for (const auto& id : sink_ids(loaded.unit)) {
        const double n = frobenius_norm(outputs.at(id));
        dense_norm += n * n;
      }
      dense_norm = std::sqrt(dense_norm);
      record["status"] = "ok";
      record["activations"] = loaded.heldout ? "heldout" : "calibration";
      record["output_error"] = err;
      record["relative_error"] = dense_norm > 0 ? err / dense_norm : 0.0;
    } catch (const std::exception& err) {
      ok = false;
      record["status"] = "error";
      record["error"] = err.what();
    }
    units.push_back(std::move(record));
  }
  return json{{"version", kEvalVersion}, {"status", ok ? "ok" : "failed"}, {"units", units}};
}

json run_sweep(const Manifest& manifest, const SweepOptions& options) {
  json points = json::array();
  bool ok = true;
  for (const double rate : options.rates) {
    Manifest m = manifest;
    m.pattern = Unstructured{rate};
    validate(m.pattern);
    RunOptions run = options.run;
    run.out_dir = options.out_dir / rate_label(rate);
    run.report_path = run.out_dir / "report.json";
    const auto outcome = run_prune(m, run);
    ok = ok && outcome.ok;
    double total_e_best = 0;
    for (const auto& unit : outcome.report.at("units")) {
      if (unit.at("status") != "ok") continue;
      for (const auto& node : unit.at("nodes")) total_e_best += node.at("e_best").get<double>();
    }
    const json eval = eval_error(m, run.out_dir);
    write_json(run.out_dir / "eval.json", eval);
    points.push_back({{"rate", rate},
                      {"status", outcome.ok ? "ok" : "failed"},
                      {"report", (std::filesystem::path(rate_label(rate)) / "report.json").string()},
                      {"total_e_best", total_e_best},
                      {"eval", eval.at("units")}});
  }
  json summary{{"version", kSweepVersion},
               {"seed", manifest.seed},
               {"status", ok ? "ok" : "failed"},
               {"points", points}};
  write_json(options.out_dir / "sweep.json", summary);
  return summary;
}

json strip_timing(json report) {
  if (report.is_object()) {
    for (auto it = report.begin(); it != report.end();) {
      const std::string& key = it.key();
      if (key.size() > 7 && key.ends_with("_time_s")) {
        it = report.erase(it);
      } else {
        *it = strip_timing(std::move(*it));
        ++it;
      }
    }
  } else if (report.is_array()) {
    for (auto& v : report) v = strip_timing(std::move(v));
  }
  return report;
}

}  // namespace l1prune
