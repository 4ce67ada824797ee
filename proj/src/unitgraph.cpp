#include "l1prune/unitgraph.hpp"

#include <chrono>
#include <set>

namespace l1prune {

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "none"; }

std::string_view to_string(WarmStartKind k) {
  return k == WarmStartKind::wanda ? "wanda" : "magnitude";
}

Activation parse_activation(std::string_view text) {
  if (text == "none") return Activation::none;
  if (text == "relu") return Activation::relu;
  throw ParameterError("unknown activation '" + std::string(text) + "'");
}

WarmStartKind parse_warm_start(std::string_view text) {
  if (text == "magnitude") return WarmStartKind::magnitude;
  if (text == "wanda") return WarmStartKind::wanda;
  throw ParameterError("unknown warm start '" + std::string(text) + "'");
}

void validate(const PruneUnit& unit) {
  if (unit.nodes.empty()) throw GraphError("unit '" + unit.name + "' has no nodes");
  if (unit.input_dim <= 0) throw GraphError("unit '" + unit.name + "' has no input dimension");
  std::map<std::string, Eigen::Index> out_rows;
  bool reads_input = false;
  for (const auto& node : unit.nodes) {
    if (node.id.empty() || node.id == kUnitInput) {
      throw GraphError("unit '" + unit.name + "': invalid node id '" + node.id + "'");
    }
    if (out_rows.count(node.id)) {
      throw GraphError("unit '" + unit.name + "': duplicate node id '" + node.id + "'");
    }
    if (node.weight.size() == 0) {
      throw GraphError("unit '" + unit.name + "': node '" + node.id + "' has an empty weight");
    }
    Eigen::Index producer_rows = 0;
    if (node.input == kUnitInput) {
      reads_input = true;
      producer_rows = unit.input_dim;
    } else if (auto it = out_rows.find(node.input); it != out_rows.end()) {
      producer_rows = it->second;
    } else {
      throw GraphError("unit '" + unit.name + "': edge " + node.input + " -> " + node.id +
                       " refers to an unknown or later node");
    }
    if (node.weight.cols() != producer_rows) {
      throw GraphError("unit '" + unit.name + "': edge " + std::string(node.input) + " -> " +
                       node.id + " carries " + std::to_string(producer_rows) +
                       " features but the weight has " + std::to_string(node.weight.cols()) +
                       " columns");
    }
    out_rows.emplace(node.id, node.weight.rows());
  }
  if (!reads_input) throw GraphError("unit '" + unit.name + "': no node reads the unit input");
}

std::vector<std::string> sink_ids(const PruneUnit& unit) {
  std::set<std::string> consumed;
  for (const auto& node : unit.nodes) consumed.insert(node.input);
  std::vector<std::string> sinks;
  for (const auto& node : unit.nodes) {
    if (!consumed.count(node.id)) sinks.push_back(node.id);
  }
  return sinks;
}

MatrixD apply_activation(MatrixD m, Activation a) {
  if (a == Activation::relu) m = m.cwiseMax(0.0);
  return m;
}

namespace {

const MatrixD& input_of(const OperatorNode& node, const MatrixD& x,
                        const std::map<std::string, MatrixD>& outputs) {
  return node.input == kUnitInput ? x : outputs.at(node.input);
}

void check_input(const PruneUnit& unit, const MatrixD& x) {
  validate(unit);
  require_valid(x, "unit input");
  if (x.rows() != unit.input_dim) {
    throw GraphError("unit '" + unit.name + "': input has " + std::to_string(x.rows()) +
                     " rows, expected " + std::to_string(unit.input_dim));
  }
}

UnitPruneResult prune_unit_impl(const PruneUnit& unit, const MatrixD& x,
                                const SparsityPattern& pattern, WarmStartKind warm,
                                const TunerConfig& cfg, bool corrected) {
  using Clock = std::chrono::steady_clock;
  check_input(unit, x);
  const auto unit_start = Clock::now();

  const auto dense = dense_forward(unit, x);
  std::map<std::string, MatrixD> propagated;
  UnitPruneResult out;
  out.unit = unit.name;
  out.nodes.reserve(unit.nodes.size());

  for (const auto& node : unit.nodes) {
    const auto start = Clock::now();
    const MatrixD& dense_in = input_of(node, x, dense);
    const MatrixD& solver_in = corrected ? input_of(node, x, propagated) : dense_in;
    NodePruneResult record;
    record.id = node.id;
    try {
      const MatrixD initial = warm_start(warm, node.weight, solver_in, pattern);
      record.result = prune_operator(node.weight, dense_in, solver_in, pattern, initial, cfg);
    } catch (const Error& err) {
      throw NodeError(node.id, err.what());
    }
    propagated[node.id] = apply_activation(
        record.result.weights * input_of(node, x, propagated), node.activation);
    record.solver_input = solver_in;
    record.wall_time_s = std::chrono::duration<double>(Clock::now() - start).count();
    out.nodes.push_back(std::move(record));
  }

  out.unit_output_error = unit_output_error(unit, with_pruned_weights(unit, out), x);
  out.wall_time_s = std::chrono::duration<double>(Clock::now() - unit_start).count();
  return out;
}

}  // namespace

std::map<std::string, MatrixD> dense_forward(const PruneUnit& unit, const MatrixD& x) {
  check_input(unit, x);
  std::map<std::string, MatrixD> outputs;
  for (const auto& node : unit.nodes) {
    outputs[node.id] = apply_activation(node.weight * input_of(node, x, outputs), node.activation);
  }
  return outputs;
}

double unit_output_error(const PruneUnit& dense, const PruneUnit& pruned, const MatrixD& x) {
  if (dense.nodes.size() != pruned.nodes.size()) {
    throw GraphError("unit_output_error: units have different node counts");
  }
  const auto a = dense_forward(dense, x);
  const auto b = dense_forward(pruned, x);
  double sum = 0;
  for (const auto& id : sink_ids(dense)) {
    const double e = frobenius_norm(a.at(id) - b.at(id));
    sum += e * e;
  }
  return std::sqrt(sum);
}

MatrixD warm_start(WarmStartKind kind, const MatrixD& w, const MatrixD& xstar,
                   const SparsityPattern& pattern) {
  if (kind == WarmStartKind::magnitude) return round_to_pattern(w, pattern);
  if (w.cols() != xstar.rows()) {
    throw ShapeError("warm_start: weight has " + std::to_string(w.cols()) +
                     " columns but activations have " + std::to_string(xstar.rows()) + " rows");
  }
  const Eigen::RowVectorXd feature_norms = xstar.rowwise().norm().transpose();
  const MatrixD scores = w.cwiseAbs().array().rowwise() * feature_norms.array();
  return prune_by_score(w, scores, pattern);
}

PruneUnit with_pruned_weights(const PruneUnit& unit, const UnitPruneResult& result) {
  PruneUnit out = unit;
  for (auto& node : out.nodes) {
    for (const auto& rec : result.nodes) {
      if (rec.id == node.id) node.weight = rec.result.weights;
    }
  }
  return out;
}

UnitPruneResult prune_unit(const PruneUnit& unit, const MatrixD& x, const SparsityPattern& pattern,
                           WarmStartKind warm, const TunerConfig& cfg) {
  return prune_unit_impl(unit, x, pattern, warm, cfg, true);
}

UnitPruneResult prune_unit_uncorrected(const PruneUnit& unit, const MatrixD& x,
                                       const SparsityPattern& pattern, WarmStartKind warm,
                                       const TunerConfig& cfg) {
  return prune_unit_impl(unit, x, pattern, warm, cfg, false);
}

}  // namespace l1prune
