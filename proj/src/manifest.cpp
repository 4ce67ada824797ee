#include "l1prune/manifest.hpp"

#include <fstream>
#include <set>

#include "l1prune/npy.hpp"

namespace l1prune {

using nlohmann::json;

json tuner_to_json(const TunerConfig& cfg) {
  return json{{"lambda0", cfg.lambda_init},
              {"lambda_lo", cfg.lambda_lo},
              {"lambda_hi", cfg.lambda_hi},
              {"xi", cfg.xi},
              {"K", cfg.fista.max_iters},
              {"T", cfg.max_non_improving},
              {"epsilon", cfg.epsilon},
              {"stop_tol", cfg.fista.stop_tol},
              {"deterministic", cfg.fista.deterministic}};
}

TunerConfig tuner_from_json(const json& j, TunerConfig cfg) {
  if (!j.is_object()) throw ParameterError("manifest: 'tuner' must be an object");
  auto read = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  read("lambda0", cfg.lambda_init);
  read("lambda_lo", cfg.lambda_lo);
  read("lambda_hi", cfg.lambda_hi);
  read("xi", cfg.xi);
  read("K", cfg.fista.max_iters);
  read("T", cfg.max_non_improving);
  read("epsilon", cfg.epsilon);
  read("stop_tol", cfg.fista.stop_tol);
  read("deterministic", cfg.fista.deterministic);
  validate(cfg);
  return cfg;
}

json to_json(const Manifest& manifest) {
  json units = json::array();
  for (const auto& unit : manifest.units) {
    json nodes = json::array();
    for (const auto& node : unit.nodes) {
      nodes.push_back({{"id", node.id},
                       {"weight", node.weight},
                       {"input", node.input},
                       {"activation", to_string(node.activation)}});
    }
    json u{{"name", unit.name}, {"calibration", unit.calibration}, {"nodes", nodes}};
    if (!unit.heldout.empty()) u["heldout"] = unit.heldout;
    units.push_back(std::move(u));
  }
  return json{{"version", manifest.version},
              {"seed", manifest.seed},
              {"pattern", to_string(manifest.pattern)},
              {"warm_start", to_string(manifest.warm_start)},
              {"tuner", tuner_to_json(manifest.tuner)},
              {"units", units}};
}

Manifest manifest_from_json(const json& j, const std::filesystem::path& base_dir) {
  try {
    Manifest m;
    m.base_dir = base_dir;
    m.version = j.at("version").get<std::string>();
    if (m.version != kManifestVersion) {
      throw ParameterError("manifest: unsupported version '" + m.version + "'");
    }
    m.seed = j.value("seed", std::uint64_t{0});
    m.pattern = parse_pattern(j.at("pattern").get<std::string>());
    m.warm_start = parse_warm_start(j.value("warm_start", std::string("wanda")));
    if (j.contains("tuner")) m.tuner = tuner_from_json(j.at("tuner"));
    std::set<std::string> names;
    for (const auto& ju : j.at("units")) {
      UnitSpec unit;
      unit.name = ju.at("name").get<std::string>();
      if (!names.insert(unit.name).second) {
        throw ParameterError("manifest: duplicate unit name '" + unit.name + "'");
      }
      unit.calibration = ju.at("calibration").get<std::string>();
      unit.heldout = ju.value("heldout", std::string());
      for (const auto& jn : ju.at("nodes")) {
        unit.nodes.push_back(NodeSpec{jn.at("id").get<std::string>(),
                                      jn.at("weight").get<std::string>(),
                                      jn.value("input", std::string(kUnitInput)),
                                      parse_activation(jn.value("activation", "none"))});
      }
      m.units.push_back(std::move(unit));
    }
    if (m.units.empty()) throw ParameterError("manifest: no units");
    return m;
  } catch (const json::exception& err) {
    throw ParameterError(std::string("manifest: ") + err.what());
  }
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& err) {
    throw FormatError("manifest '" + path.string() + "': " + err.what(), err.byte);
  }
  return manifest_from_json(j, path.parent_path());
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << to_json(manifest).dump(2) << '\n';
}

LoadedUnit load_unit(const Manifest& manifest, const UnitSpec& spec) {
  LoadedUnit out;
  out.calibration = load_array(manifest.base_dir / spec.calibration);
  if (!spec.heldout.empty()) {
    out.heldout = load_array(manifest.base_dir / spec.heldout);
    if (out.heldout->rows() != out.calibration.rows()) {
      throw ShapeError("unit '" + spec.name + "': held-out activations have " +
                       std::to_string(out.heldout->rows()) + " features, calibration has " +
                       std::to_string(out.calibration.rows()));
    }
  }
  out.unit.name = spec.name;
  out.unit.input_dim = out.calibration.rows();
  for (const auto& node : spec.nodes) {
    out.unit.nodes.push_back(OperatorNode{node.id, load_array(manifest.base_dir / node.weight),
                                          node.input, node.activation});
  }
  // Pattern applicability is a per-node pruning failure, not a load error,
  // so eval works on any manifest and one bad unit does not block the rest.
  validate(out.unit);
  return out;
}

void validate_files(const Manifest& manifest) {
  for (const auto& unit : manifest.units) load_unit(manifest, unit);
}

std::filesystem::path pruned_path_for(const Manifest& manifest, const std::string& weight,
                                      const std::filesystem::path& out_dir) {
  const std::filesystem::path original = manifest.base_dir / weight;
  auto name = original.stem();
  name += ".pruned.npy";
  return out_dir.empty() ? original.parent_path() / name : out_dir / name;
}

}  // namespace l1prune
