// l1prune command-line driver.
//
//   l1prune gen    --out DIR [--seed S] [--units U] [--nodes N] [--m M] [--n N] [--p P] ...
//   l1prune prune  --manifest FILE [--out DIR] [--report FILE] [--parallel N] [--no-correction]
//   l1prune eval   --manifest FILE --pruned-dir DIR [--report FILE]
//   l1prune sweep  --manifest FILE --out DIR [--rates 0.1,0.2,...]
//
// Exit status: 0 success, 1 a unit failed to prune or evaluate, 2 invalid input.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "l1prune/generate.hpp"
#include "l1prune/manifest.hpp"
#include "l1prune/runner.hpp"

namespace {

using namespace l1prune;
namespace fs = std::filesystem;

struct Overrides {
  std::optional<std::string> pattern;
  std::optional<std::string> warm;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda0;
  std::optional<std::size_t> k;
  std::optional<std::size_t> t;
  std::optional<double> epsilon;
  std::optional<double> xi;
  bool deterministic = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--pattern", pattern, "unstructured:<rate> or semi:<n>:<m>");
    cmd->add_option("--warm", warm, "warm start: magnitude or wanda");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--lambda0", lambda0, "initial regularisation weight");
    cmd->add_option("--K", k, "FISTA iterations per solve");
    cmd->add_option("--T", t, "non-improving outer iterations before stopping");
    cmd->add_option("--epsilon", epsilon, "relative-improvement stop threshold");
    cmd->add_option("--xi", xi, "rounding-error ratio threshold for lambda bisection");
    cmd->add_flag("--deterministic", deterministic, "sequential reductions only");
  }

  void apply(SparsityPattern& p, WarmStartKind& w, std::uint64_t& s, TunerConfig& cfg) const {
    if (pattern) p = parse_pattern(*pattern);
    if (warm) w = parse_warm_start(*warm);
    if (seed) s = *seed;
    if (lambda0) cfg.lambda_init = *lambda0;
    if (k) cfg.fista.max_iters = *k;
    if (t) cfg.max_non_improving = *t;
    if (epsilon) cfg.epsilon = *epsilon;
    if (xi) cfg.xi = *xi;
    if (deterministic) cfg.fista.deterministic = true;
    validate(cfg);
  }

  void apply(Manifest& m) const { apply(m.pattern, m.warm_start, m.seed, m.tuner); }
};

void emit(const nlohmann::json& j, const fs::path& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layer-wise l1-regularised post-training pruning"};
  app.require_subcommand(1);

  ProblemSpec gen_spec;
  fs::path gen_out;
  std::string topology = "chain";
  Overrides gen_over;
  auto* gen = app.add_subcommand("gen", "generate a synthetic problem and manifest");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--units", gen_spec.units, "number of pruning units");
  gen->add_option("--nodes", gen_spec.nodes_per_unit, "operators per unit (chain topology)");
  gen->add_option("--m", gen_spec.m, "operator output width");
  gen->add_option("--n", gen_spec.n, "unit input width");
  gen->add_option("--p", gen_spec.p, "calibration columns");
  gen->add_option("--topology", topology, "chain or decoder");
  gen->add_option("--activations", gen_spec.activations, "none, relu or alternate");
  gen_over.attach(gen);

  fs::path manifest_path;
  RunOptions run;
  bool no_correction = false;
  Overrides prune_over;
  auto* prune = app.add_subcommand("prune", "prune every unit listed in a manifest");
  prune->add_option("--manifest", manifest_path, "manifest JSON")->required()->check(CLI::ExistingFile);
  prune->add_option("--out", run.out_dir, "directory for pruned arrays (default: beside originals)");
  prune->add_option("--report", run.report_path, "report path (default: <out or manifest dir>/report.json)");
  prune->add_option("--parallel", run.parallelism, "units pruned concurrently")->check(CLI::PositiveNumber);
  prune->add_flag("--no-correction", no_correction, "fit every operator on its dense input");
  prune_over.attach(prune);

  fs::path pruned_dir;
  fs::path eval_report;
  auto* eval = app.add_subcommand("eval", "measure pruned unit output error on held-out data");
  eval->add_option("--manifest", manifest_path, "manifest JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--pruned-dir", pruned_dir, "directory holding *.pruned.npy")->required();
  eval->add_option("--report", eval_report, "write results here instead of stdout");

  SweepOptions sweep_opts;
  Overrides sweep_over;
  auto* sweep = app.add_subcommand("sweep", "prune and evaluate across unstructured rates");
  sweep->add_option("--manifest", manifest_path, "manifest JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_opts.out_dir, "sweep output directory")->required();
  sweep->add_option("--rates", sweep_opts.rates, "comma-separated rates")->delimiter(',');
  sweep->add_option("--parallel", sweep_opts.run.parallelism, "units pruned concurrently");
  sweep->add_flag("--no-correction", no_correction, "fit every operator on its dense input");
  sweep_over.attach(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    // --help exits 0; every other parse failure is invalid input.
    return app.exit(err) == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      std::uint64_t seed = 0;
      gen_spec.topology = parse_topology(topology);
      gen_over.apply(gen_spec.pattern, gen_spec.warm_start, seed, gen_spec.tuner);
      generate_problem(seed, gen_spec, gen_out);
      std::cout << (gen_out / "manifest.json").string() << '\n';
      return 0;
    }

    Manifest manifest = read_manifest(manifest_path);

    if (*prune) {
      prune_over.apply(manifest);
      run.corrected = !no_correction;
      if (run.report_path.empty()) {
        run.report_path = (run.out_dir.empty() ? manifest.base_dir : run.out_dir) / "report.json";
      }
      const auto outcome = run_prune(manifest, run);
      for (const auto& unit : outcome.report.at("units")) {
        if (unit.at("status") != "ok") {
          std::cerr << "unit " << unit.at("name").get<std::string>() << " failed: "
                    << unit.at("error").get<std::string>() << '\n';
          continue;
        }
        for (const auto& node : unit.at("nodes")) {
          for (const auto& w : node.at("warnings")) {
            std::cerr << "warning: " << unit.at("name").get<std::string>() << "/"
                      << node.at("id").get<std::string>() << ": " << w.get<std::string>() << '\n';
          }
        }
      }
      std::cout << run.report_path.string() << '\n';
      return outcome.ok ? 0 : 1;
    }

    if (*eval) {
      const auto result = eval_error(manifest, pruned_dir);
      emit(result, eval_report);
      return result.at("status") == "ok" ? 0 : 1;
    }

    if (*sweep) {
      sweep_over.apply(manifest);
      sweep_opts.run.corrected = !no_correction;
      const auto summary = run_sweep(manifest, sweep_opts);
      std::cout << (sweep_opts.out_dir / "sweep.json").string() << '\n';
      return summary.at("status") == "ok" ? 0 : 1;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  }
  return 0;
}
